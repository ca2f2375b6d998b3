#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "dmapx/dataset.hpp"
#include "dmapx/potentials.hpp"

namespace dmapx::sampler {

struct Box {
    Eigen::VectorXd lo, hi;
    bool contains(const Eigen::VectorXd& x) const {
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
};

struct SamplerConfig {
    double dt = 0.01;
    std::int64_t burn_in = 100000;  // steps discarded before the first kept sample
    std::int64_t thin = 10;         // keep every thin-th step
    std::int64_t n_keep = 10000;
    std::uint64_t seed = 0;
    Eigen::VectorXd x0;
    std::optional<Box> box;  // proposed moves leaving the box are rejected
    // Test hook: scales the Brownian term; 0 turns the integrator into plain
    // gradient descent so fixed points of the drift can be asserted exactly.
    double noise_scale = 1.0;
};

// Euler-Maruyama integration of  dx = -grad U dt + sqrt(2 dt) xi.
// The invariant density is e^{-U} up to O(dt) discretization bias.
// Callers running several chains in parallel should derive per-chain
// configs with seed ^ chain_index; a single chain is strictly sequential.
dataset::PointCloud langevin_sample(const potentials::PotentialSpec& spec,
                                    const SamplerConfig& cfg);

// n i.i.d. draws with independent coordinates, coordinate j ~ Normal(0, tau_j);
// the exact equilibrium of the parabolic catalog potentials.
dataset::PointCloud gaussian_direct_sample(const Eigen::VectorXd& taus, std::size_t n,
                                           std::uint64_t seed);

}  // namespace dmapx::sampler
