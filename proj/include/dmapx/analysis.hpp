#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "dmapx/kernel.hpp"

namespace dmapx::analysis {

// Two-way split at threshold exactly 0: label 1 where psi > 0, else 0.
std::vector<int> sign_cluster(const Eigen::VectorXd& psi);

struct ConfusionReport {
    int errors = 0;                       // minimized over label permutations
    std::vector<int> permutation;        // applied to truth labels
    std::vector<std::vector<int>> counts;  // counts[pred][truth], pre-permutation
};

// Best-permutation disagreement between two labelings (label sets of size <= 6).
ConfusionReport confusion_report(const std::vector<int>& pred, const std::vector<int>& truth);

struct QuadraticFit {
    double a = 0, b = 0, c = 0;  // v ~ a u^2 + b u + c
    double r2 = 0;
    std::size_t n_used = 0;
};

// Least-squares parabola of v against u after dropping the trim_q
// lowest-density points (poorly sampled edges carry the largest errors).
QuadraticFit quadratic_fit_r2(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                              double trim_q, const kernel::DensityEstimate& density);

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centers;  // k x p
    double inertia = 0;
    bool degenerate = false;  // all points equal: single-cluster fallback
};

// Lloyd's algorithm with k-means++ seeding, 50 seeded restarts, best inertia
// kept (ties: lowest restart index). Deterministic in seed.
KMeansResult kmeans(const Eigen::MatrixXd& coords, std::size_t k, std::uint64_t seed);

}  // namespace dmapx::analysis
