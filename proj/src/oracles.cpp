#include "dmapx/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dmapx/errors.hpp"

namespace dmapx::oracles {

namespace {

void check_ou(const OUParams& p) {
    require(p.tau > 0 && p.epsilon > 0, "OU oracle: tau and epsilon must be positive");
}

}  // namespace

std::vector<double> ou_spectrum(const OUParams& p, std::size_t kmax) {
    check_ou(p);
    require(kmax >= 1, "ou_spectrum: kmax must be at least 1");
    const double mu = p.tau / (p.tau + p.epsilon);
    std::vector<double> lam(kmax);
    double v = 1.0;
    for (std::size_t k = 0; k < kmax; ++k) {
        lam[k] = v;
        v *= mu;
    }
    return lam;
}

double ou_eigenfunction(const OUParams& p, int k, double x, OUVariant variant) {
    check_ou(p);
    require(k == 0 || k == 1,
            "ou_eigenfunction: only k in {0,1} has a stated closed form");
    const double poly = (k == 0) ? 1.0 : x;
    if (variant == OUVariant::backward) return poly;  // sqrt(p_eps) cancels the Gaussian
    return poly * std::exp(-x * x / (4 * (p.epsilon + p.tau)));
}

double ou_smoothed_density(const OUParams& p, double x) {
    check_ou(p);
    const double s2 = p.tau + p.epsilon;
    return std::exp(-x * x / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
}

std::vector<std::pair<double, std::vector<int>>> tensor_spectrum(const Eigen::VectorXd& taus,
                                                                 double epsilon,
                                                                 std::size_t kmax) {
    require(taus.size() >= 1 && (taus.array() > 0).all(),
            "tensor_spectrum: every tau must be positive");
    require(epsilon > 0, "tensor_spectrum: epsilon must be positive");
    require(kmax >= 1, "tensor_spectrum: kmax must be at least 1");
    const Eigen::Index d = taus.size();
    std::vector<double> mu(static_cast<std::size_t>(d));
    for (Eigen::Index a = 0; a < d; ++a)
        mu[static_cast<std::size_t>(a)] = taus[a] / (taus[a] + epsilon);

    // all multi-indices with total degree <= kmax; the kmax largest products
    // of factors < 1 never need higher degree
    std::vector<std::pair<double, std::vector<int>>> items;
    std::vector<int> index(static_cast<std::size_t>(d), 0);
    const auto emit = [&](auto&& self, std::size_t pos, int budget, double value) -> void {
        if (pos == index.size()) {
            items.emplace_back(value, index);
            return;
        }
        double v = value;
        for (int i = 0; i <= budget; ++i) {
            index[pos] = i;
            self(self, pos + 1, budget - i, v);
            v *= mu[pos];
        }
        index[pos] = 0;
    };
    emit(emit, 0, static_cast<int>(kmax), 1.0);

    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // ties: lexicographically smallest index
    });
    if (items.size() > kmax) items.resize(kmax);
    return items;
}

double hermite_eigenfunction(int k, double tau, double x) {
    require(k >= 0 && k <= 4, "hermite_eigenfunction: k must be in [0,4]");
    require(tau > 0, "hermite_eigenfunction: tau must be positive");
    const double t = x * std::sqrt(2.0 / tau);
    switch (k) {
        case 0: return 1.0;
        case 1: return t;
        case 2: return t * t - 1;
        case 3: return t * (t * t - 3);
        default: return t * t * (t * t - 6) + 3;
    }
}

double doublewell_psi1(double xL, double xR, double tauL, double tauR, double epsilon,
                       double x) {
    require(xL < xR, "doublewell_psi1: xL must be left of xR");
    require(tauL > 0 && tauR > 0 && epsilon > 0,
            "doublewell_psi1: tauL, tauR, epsilon must be positive");
    const auto phi = [epsilon](double x0, double tau, double x) {
        const double s2 = tau + epsilon;
        return std::sqrt(tau / s2) * std::exp(-(x - x0) * (x - x0) / (2 * s2));
    };
    const double L = phi(xL, tauL, x);
    const double R = phi(xR, tauR, x);
    return (L - R) / (L + R);
}

TestFunction testfn_sin() {
    TestFunction f;
    f.value = [](const Eigen::VectorXd& x) { return std::sin(x[0]); };
    f.gradient = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        g[0] = std::cos(x[0]);
        return g;
    };
    f.laplacian = [](const Eigen::VectorXd& x) { return -std::sin(x[0]); };
    return f;
}

TestFunction testfn_linear() {
    TestFunction f;
    f.value = [](const Eigen::VectorXd& x) { return x[0]; };
    f.gradient = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        g[0] = 1.0;
        return g;
    };
    f.laplacian = [](const Eigen::VectorXd&) { return 0.0; };
    return f;
}

TestFunction testfn_gauss() {
    TestFunction f;
    f.value = [](const Eigen::VectorXd& x) { return std::exp(-x.squaredNorm() / 2); };
    f.gradient = [](const Eigen::VectorXd& x) {
        return (-std::exp(-x.squaredNorm() / 2) * x).eval();
    };
    f.laplacian = [](const Eigen::VectorXd& x) {
        const double n2 = x.squaredNorm();
        return (n2 - static_cast<double>(x.size())) * std::exp(-n2 / 2);
    };
    return f;
}

double backward_generator_reference(const potentials::PotentialSpec& spec, double alpha,
                                    const TestFunction& f, const Eigen::VectorXd& x) {
    require(alpha >= 0 && alpha <= 1, "generator reference: alpha must be in [0,1]");
    const auto e = potentials::evaluate(spec, x);
    return f.laplacian(x) - 2 * (1 - alpha) * f.gradient(x).dot(e.gradient);
}

double forward_generator_reference(const potentials::PotentialSpec& spec, double alpha,
                                   const TestFunction& f, const Eigen::VectorXd& x) {
    require(alpha >= 0 && alpha <= 1, "generator reference: alpha must be in [0,1]");
    const auto e = potentials::evaluate(spec, x);
    const double schrodinger = e.gradient.squaredNorm() - e.laplacian;
    return f.laplacian(x) - 2 * alpha * f.gradient(x).dot(e.gradient) +
           (2 * alpha - 1) * f.value(x) * schrodinger;
}

std::vector<double> brute_force_spectrum(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    require(n >= 1 && n <= 6 && A.cols() == n, "brute_force_spectrum: need square n <= 6");

    // Symmetrize: either A is already symmetric, or a positive diagonal
    // scaling s with s_i^2 A_ij = s_j^2 A_ji exists (reversible chains).
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    Eigen::MatrixXd S(n, n);
    if ((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        S = (A + A.transpose()) / 2;
    } else {
        Eigen::VectorXd s2 = Eigen::VectorXd::Zero(n);
        s2[0] = 1.0;
        for (Eigen::Index pass = 0; pass < n; ++pass)
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    if (s2[i] > 0 && s2[j] == 0 && A(j, i) != 0 && A(i, j) != 0)
                        s2[j] = s2[i] * A(i, j) / A(j, i);
        if ((s2.array() <= 0).any())
            throw ContractError("brute_force_spectrum: input is not symmetrizable");
        const Eigen::VectorXd s = s2.cwiseSqrt();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) S(i, j) = s[i] * A(i, j) / s[j];
        if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
            throw ContractError("brute_force_spectrum: input is not similar to symmetric");
        S = (S + S.transpose()) / 2;
    }

    // eigenvalue count below t = negative pivots of the LDL^T of S - tI
    const auto count_below = [&](double t) -> int {
        Eigen::MatrixXd B = S;
        B.diagonal().array() -= t;
        int neg = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            double pivot = B(k, k);
            if (std::abs(pivot) < 1e-300) pivot = -1e-300;  // exact hit: nudge into the count
            if (pivot < 0) ++neg;
            for (Eigen::Index i = k + 1; i < n; ++i) {
                const double factor = B(i, k) / pivot;
                for (Eigen::Index j = k + 1; j < n; ++j) B(i, j) -= factor * B(k, j);
            }
        }
        return neg;
    };

    // Gershgorin bounds
    double lo = S(0, 0), hi = S(0, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double radius = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) radius += std::abs(S(i, j));
        lo = std::min(lo, S(i, i) - radius);
        hi = std::max(hi, S(i, i) + radius);
    }
    lo -= 1e-8;
    hi += 1e-8;

    std::vector<double> lam(static_cast<std::size_t>(n));
    for (Eigen::Index m = 0; m < n; ++m) {
        // m-th smallest: bisect until the count straddles m / m+1
        double a = lo, b = hi;
        for (int iter = 0; iter < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++iter) {
            const double mid = (a + b) / 2;
            if (count_below(mid) <= m)
                a = mid;
            else
                b = mid;
        }
        lam[static_cast<std::size_t>(n - 1 - m)] = (a + b) / 2;  // store descending
    }
    return lam;
}

}  // namespace dmapx::oracles
