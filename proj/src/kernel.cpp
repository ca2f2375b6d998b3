#include "dmapx/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dmapx/errors.hpp"
#include "dmapx/rng.hpp"

namespace dmapx::kernel {

KernelMatrix gaussian_kernel_matrix(const dataset::PointCloud& cloud,
                                    const KernelParams& params) {
    require(params.epsilon > 0, "kernel: epsilon must be positive");
    if (params.cutoff_r2)
        require(*params.cutoff_r2 >= 18 * params.epsilon,
                "kernel: cutoff_r2 must be at least 18*epsilon (entries above e^-9 "
                "may not be truncated)");
    const Eigen::Index n = cloud.size();
    const std::size_t bytes = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 8;
    if (bytes > params.memory_budget_bytes)
        throw CapacityError("kernel: " + std::to_string(n) + "^2 doubles (" +
                            std::to_string(bytes) +
                            " bytes) exceed the memory budget; truncate or subsample");

    Eigen::MatrixXd K(n, n);
    const double inv = 1.0 / (2 * params.epsilon);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r2 = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
            const double v =
                (params.cutoff_r2 && r2 > *params.cutoff_r2) ? 0.0 : std::exp(-r2 * inv);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return KernelMatrix{std::move(K)};
}

DensityEstimate density_estimate(const KernelMatrix& km) {
    const Eigen::Index n = km.K.rows();
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0;
        for (Eigen::Index j = 0; j < n; ++j) acc += km.K(i, j);  // fixed index order
        q[i] = acc;
    }
    return DensityEstimate{std::move(q)};
}

double epsilon_heuristic(const dataset::PointCloud& cloud) {
    const Eigen::Index n = cloud.size();
    require(n >= 2, "epsilon_heuristic: need at least 2 points");
    rng::CounterRng gen(0x0ebc0ffee5eedull);
    constexpr std::size_t pairs = 10000;
    std::vector<double> r2(pairs);
    for (std::size_t s = 0; s < pairs; ++s) {
        const auto i = static_cast<Eigen::Index>(gen.uniform_below(static_cast<std::uint64_t>(n)));
        auto j = static_cast<Eigen::Index>(gen.uniform_below(static_cast<std::uint64_t>(n - 1)));
        if (j >= i) ++j;
        r2[s] = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
    }
    std::sort(r2.begin(), r2.end());
    const double median = (r2[pairs / 2 - 1] + r2[pairs / 2]) / 2;
    if (median <= 0) throw NumericError("epsilon_heuristic: degenerate cloud (all sampled pairs coincide)");
    return median / (2 * std::log(10.0));
}

}  // namespace dmapx::kernel
