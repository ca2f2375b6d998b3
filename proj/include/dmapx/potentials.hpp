#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dmapx::potentials {

// A potential U with closed-form gradient and Laplacian. The same object
// drives the Langevin sampler (drift -grad U) and the analytic references;
// no numeric differentiation happens outside the test suite.
struct PotentialSpec {
    std::string name;
    int dim = 0;
    std::map<std::string, double> params;
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<double(const Eigen::VectorXd&)> laplacian;
    // Axis-aligned box used by property tests to draw representative points.
    Eigen::VectorXd box_lo, box_hi;
};

struct Evaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    double laplacian = 0.0;
};

Evaluation evaluate(const PotentialSpec& spec, const Eigen::VectorXd& x);

// |grad U|^2 - lap U, the potential the symmetrized operator converges to.
double schrodinger_potential(const PotentialSpec& spec, const Eigen::VectorXd& x);

// Gradient-descent refinement from each start (fixed step with backtracking
// halving); returns deduplicated points with |grad U| < tol. Starts that do
// not converge within 1e5 steps are skipped, not fatal.
std::vector<Eigen::VectorXd> locate_minima(const PotentialSpec& spec,
                                           const std::vector<Eigen::VectorXd>& starts,
                                           double tol);

// Catalog.
PotentialSpec parabolic1d(double tau);              // U = x^2 / 2tau
PotentialSpec parabolic_nd(const Eigen::VectorXd& taus);  // U = sum x_j^2 / 2tau_j
PotentialSpec doublewell2d();   // quartic-in-x well pair at x=0 and x=4, harmonic in y
PotentialSpec triplewell2d(double beta);  // two deep wells at (+-1,0), shallow third near (0,5/3)

// Parse "name" or "name:key=value,key=value" (e.g. "parabolic1d:tau=1.0").
PotentialSpec from_string(const std::string& text);

}  // namespace dmapx::potentials
