#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "dmapx/potentials.hpp"

namespace dmapx::oracles {

// Closed-form references for Gaussian equilibrium data under the kernel
// bandwidth epsilon. Everything here is independent of the graph pipeline
// and is used as ground truth by the tests.

struct OUParams {
    double tau = 1.0;      // equilibrium variance of the parabolic potential
    double epsilon = 0.1;  // kernel bandwidth
};

// lambda_k = (tau / (tau + epsilon))^k for k = 0..kmax-1.
std::vector<double> ou_spectrum(const OUParams& p, std::size_t kmax);

enum class OUVariant {
    symmetric,  // eigenfunctions of the conjugated symmetric operator
    backward,   // divided by sqrt(p_eps): eigenfunctions of the backward chain
};

// k = 0: exp(-x^2 / 4(eps+tau));  k = 1: x * exp(-x^2 / 4(eps+tau)).
// The smoothed density is p_eps(y) = exp(-y^2/2(tau+eps)) / sqrt(2 pi (tau+eps)),
// whose square root cancels those exponentials exactly, so the backward
// variants are the constant 1 and the identity x (up to normalization).
double ou_eigenfunction(const OUParams& p, int k, double x,
                        OUVariant variant = OUVariant::symmetric);

// The kernel-smoothed Gaussian density p_eps above, including its prefactor.
double ou_smoothed_density(const OUParams& p, double x);

// Anisotropic product spectrum: all products prod_a mu_a^{i_a} with
// mu_a = tau_a/(tau_a+epsilon), total degree <= kmax, sorted descending,
// ties broken by lexicographically smallest multi-index.
std::vector<std::pair<double, std::vector<int>>> tensor_spectrum(
    const Eigen::VectorXd& taus, double epsilon, std::size_t kmax);

// Probabilists' Hermite eigenfunctions of the continuum backward operator,
// He_k(x * sqrt(2/tau)), for k <= 4. He_2 = He_1^2 - 1 is the parabola the
// two-coordinate embedding of slow/fast Gaussian data traces out.
double hermite_eigenfunction(int k, double tau, double x);

// Two-well composite first eigenfunction (phi_L - phi_R)/(phi_L + phi_R)
// with phi_c(x) = sqrt(tau_c/(tau_c+eps)) * exp(-(x-x_c)^2 / 2(tau_c+eps)):
// approximately +1 in the left well, -1 in the right, switching at the
// barrier.
double doublewell_psi1(double xL, double xR, double tauL, double tauR, double epsilon,
                       double x);

// A scalar test function with analytic derivatives, for generator checks.
struct TestFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<double(const Eigen::VectorXd&)> laplacian;
};

TestFunction testfn_sin();     // sin(x_0)
TestFunction testfn_linear();  // x_0
TestFunction testfn_gauss();   // exp(-|x|^2 / 2)

// Backward generator target: lap f - 2 (1-alpha) grad f . grad U.
double backward_generator_reference(const potentials::PotentialSpec& spec, double alpha,
                                    const TestFunction& f, const Eigen::VectorXd& x);

// Forward generator target:
// lap f - 2 alpha grad f . grad U + (2 alpha - 1) f (|grad U|^2 - lap U).
double forward_generator_reference(const potentials::PotentialSpec& spec, double alpha,
                                   const TestFunction& f, const Eigen::VectorXd& x);

// Independent eigenvalue oracle for matrices up to 6x6 with real spectrum:
// bisection on the inertia count of the shifted symmetrized form (LDL^T pivot
// signs), no dependence on the main eigensolver. Row-stochastic inputs are
// symmetrized by the stationary weighting first. Sorted descending.
std::vector<double> brute_force_spectrum(const Eigen::MatrixXd& A);

}  // namespace dmapx::oracles
