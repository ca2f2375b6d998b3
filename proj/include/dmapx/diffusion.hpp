#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "dmapx/kernel.hpp"

namespace dmapx::diffusion {

// Conventions
// -----------
// K_alpha_ij = K_ij / (q_i q_j)^alpha    density-compensated affinities
// d_i        = row sums of K_alpha       alpha-degrees
// M_b        = D^{-1} K_alpha            row-stochastic backward chain
// M_s        = D^{-1/2} K_alpha D^{-1/2} symmetric conjugate, same spectrum
// pi_i       = d_i / sum(d)              stationary distribution of M_b
//
// Eigenvectors: v_a orthonormal for M_s; psi_a = sqrt(S) D^{-1/2} v_a are
// right eigenvectors of M_b normalized so sum_i pi_i psi_a(i)^2 = 1 and
// psi_0 == 1; phi_a(i) = pi_i psi_a(i) are the matching left eigenvectors.
// With this scaling  sqrt(sum_{a>=1} lambda_a^{2m} (psi_a(i)-psi_a(j))^2)
// equals the 1/pi-weighted distance between rows i and j of M_b^m.

struct DiffusionParams {
    double alpha = 0.5;   // in [0, 1]
    std::size_t k = 6;    // eigenpairs, including the trivial one
    std::size_t m = 1;    // diffusion time
};

struct MarkovEnsemble {
    Eigen::MatrixXd K_alpha;
    Eigen::VectorXd d;
    Eigen::MatrixXd M_s;
    Eigen::VectorXd pi;

    Eigen::Index size() const { return d.size(); }
    // Row-stochastic backward matrix, materialized on request.
    Eigen::MatrixXd backward_matrix() const;
};

struct SpectralDecomposition {
    Eigen::VectorXd lambdas;  // k values, descending
    Eigen::MatrixXd psi;      // N x k backward (right) eigenvectors
    Eigen::MatrixXd phi;      // N x k forward (left) eigenvectors
};

struct DiffusionEmbedding {
    Eigen::MatrixXd coords;  // N x (k-1); column j-1 = lambda_j^m psi_j
};

MarkovEnsemble anisotropic_normalize(const kernel::KernelMatrix& K,
                                     const kernel::DensityEstimate& q, double alpha);

// Top-k eigenpairs of M_s converted to psi/phi. Dense solve for N <= 2000;
// above that, orthogonally deflated power iteration (residual tolerance
// 1e-12, iteration cap 1e5). Deterministic: descending eigenvalues, the
// largest-|entry| coordinate of each psi made positive (ties: lowest index),
// near-degenerate groups (gap < 1e-10) re-based by Gram-Schmidt against
// coordinate order.
SpectralDecomposition spectral_decompose(const MarkovEnsemble& ens, std::size_t k);

DiffusionEmbedding embed(const SpectralDecomposition& dec, std::size_t m);

// sqrt(sum_{a>=1} lambda_a^{2m} (psi_a(i) - psi_a(j))^2); exact diffusion
// distance when dec holds the full spectrum, a lower bound when truncated.
double diffusion_distance(const MarkovEnsemble& ens, const SpectralDecomposition& dec,
                          Eigen::Index i, Eigen::Index j, std::size_t m);

// (M_b f - f) / epsilon, evaluated in the cancellation form
// sum_j K_alpha_ij (f_j - f_i) / (d_i epsilon) so constants map to exact 0.
// epsilon must be the bandwidth K was built with.
Eigen::VectorXd apply_discrete_generator(const MarkovEnsemble& ens,
                                         const Eigen::VectorXd& f, double epsilon);

}  // namespace dmapx::diffusion
