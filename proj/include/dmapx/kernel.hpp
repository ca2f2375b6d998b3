#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "dmapx/dataset.hpp"

namespace dmapx::kernel {

struct KernelParams {
    double epsilon = 1.0;  // bandwidth, squared-length units
    // Optional truncation: entries with squared distance beyond cutoff_r2
    // become exact zeros. Must satisfy cutoff_r2 >= 18*epsilon so only
    // entries below e^{-9} are ever dropped.
    std::optional<double> cutoff_r2;
    // Dense N*N doubles above this budget raise CapacityError.
    std::size_t memory_budget_bytes = std::size_t{2} * 1024 * 1024 * 1024;
};

// Symmetric Gaussian affinities K_ij = exp(-|x_i - x_j|^2 / 2 epsilon).
// Each unordered pair is computed once, so K = K^T holds bit-exactly.
struct KernelMatrix {
    Eigen::MatrixXd K;
};

// Row sums of K: the kernel density estimate at each point (up to the
// constant Gaussian prefactor, which cancels in all normalizations).
struct DensityEstimate {
    Eigen::VectorXd q;
};

KernelMatrix gaussian_kernel_matrix(const dataset::PointCloud& cloud,
                                    const KernelParams& params);

DensityEstimate density_estimate(const KernelMatrix& K);

// Data-driven bandwidth: median squared pairwise distance over a seeded
// 10^4-pair sample, divided by 2*ln(10), so the median pair gets affinity
// exactly 0.1. Scale-covariant: scaling coordinates by c scales the result
// by c^2.
double epsilon_heuristic(const dataset::PointCloud& cloud);

}  // namespace dmapx::kernel
