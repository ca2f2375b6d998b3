#include "dmapx/potentials.hpp"

#include <cmath>

#include "dmapx/errors.hpp"

namespace dmapx::potentials {

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

void check_dim(const PotentialSpec& spec, const Eigen::VectorXd& x) {
    require(x.size() == spec.dim, "potential '" + spec.name + "' expects dimension " +
                                      std::to_string(spec.dim) + ", got " +
                                      std::to_string(x.size()));
}

}  // namespace

Evaluation evaluate(const PotentialSpec& spec, const Eigen::VectorXd& x) {
    check_dim(spec, x);
    if (!x.allFinite()) throw ContractError("potential evaluated at non-finite point");
    return Evaluation{spec.value(x), spec.gradient(x), spec.laplacian(x)};
}

double schrodinger_potential(const PotentialSpec& spec, const Eigen::VectorXd& x) {
    const Evaluation e = evaluate(spec, x);
    return e.gradient.squaredNorm() - e.laplacian;
}

std::vector<Eigen::VectorXd> locate_minima(const PotentialSpec& spec,
                                           const std::vector<Eigen::VectorXd>& starts,
                                           double tol) {
    require(tol > 0, "locate_minima: tol must be positive");
    std::vector<Eigen::VectorXd> found;
    for (const auto& start : starts) {
        check_dim(spec, start);
        Eigen::VectorXd x = start;
        double step = 0.1;
        double ux = spec.value(x);
        bool converged = false;
        for (long iter = 0; iter < 100000; ++iter) {
            const Eigen::VectorXd g = spec.gradient(x);
            if (g.norm() < tol) {
                converged = true;
                break;
            }
            const Eigen::VectorXd trial = x - step * g;
            const double ut = spec.value(trial);
            if (ut < ux) {
                x = trial;
                ux = ut;
                step *= 1.2;
            } else {
                step *= 0.5;
                if (step < 1e-18) break;
            }
        }
        // Descent on U stalls once the per-step decrease falls below the
        // floating-point resolution of U (relative to its local value), which
        // happens at |grad| far above any tight tol whenever U(min) != 0.
        // Polish with the same scheme on |grad U|^2: its minimum value is 0,
        // so the objective keeps full relative resolution to convergence.
        if (!converged) {
            step = 1e-3;
            double hx = spec.gradient(x).squaredNorm();
            for (long iter = 0; iter < 100000; ++iter) {
                const Eigen::VectorXd g = spec.gradient(x);
                if (g.norm() < tol) {
                    converged = true;
                    break;
                }
                const Eigen::VectorXd trial = x - step * g;
                const double ht = spec.gradient(trial).squaredNorm();
                if (ht < hx) {
                    x = trial;
                    hx = ht;
                    step *= 1.2;
                } else {
                    step *= 0.5;
                    if (step < 1e-18) break;
                }
            }
        }
        if (!converged) continue;  // per-start failure, not fatal
        bool duplicate = false;
        for (const auto& m : found)
            if ((m - x).norm() < 10 * tol) {
                duplicate = true;
                break;
            }
        if (!duplicate) found.push_back(std::move(x));
    }
    return found;
}

PotentialSpec parabolic1d(double tau) {
    require(tau > 0, "parabolic1d: tau must be positive");
    PotentialSpec s;
    s.name = "parabolic1d";
    s.dim = 1;
    s.params["tau"] = tau;
    s.value = [tau](const Eigen::VectorXd& x) { return x[0] * x[0] / (2 * tau); };
    s.gradient = [tau](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, x[0] / tau).eval();
    };
    s.laplacian = [tau](const Eigen::VectorXd&) { return 1.0 / tau; };
    s.box_lo = Eigen::VectorXd::Constant(1, -4 * std::sqrt(tau));
    s.box_hi = Eigen::VectorXd::Constant(1, 4 * std::sqrt(tau));
    return s;
}

PotentialSpec parabolic_nd(const Eigen::VectorXd& taus) {
    require(taus.size() >= 1 && (taus.array() > 0).all(),
            "parabolic_nd: every tau must be positive");
    PotentialSpec s;
    s.name = "parabolicnd";
    s.dim = static_cast<int>(taus.size());
    for (Eigen::Index j = 0; j < taus.size(); ++j)
        s.params["tau" + std::to_string(j)] = taus[j];
    s.value = [taus](const Eigen::VectorXd& x) {
        return (x.array().square() / (2 * taus.array())).sum();
    };
    s.gradient = [taus](const Eigen::VectorXd& x) {
        return (x.array() / taus.array()).matrix().eval();
    };
    s.laplacian = [taus](const Eigen::VectorXd&) { return taus.cwiseInverse().sum(); };
    s.box_lo = -4 * taus.array().sqrt();
    s.box_hi = 4 * taus.array().sqrt();
    return s;
}

PotentialSpec doublewell2d() {
    // U(x,y) = x^4/4 - (25/12) x^3 + (9/2) x^2 + (25/2) y^2.
    // grad_x = x (x - 2.25)(x - 4): minima at x=0 and x=4, barrier at x=2.25.
    PotentialSpec s;
    s.name = "doublewell2d";
    s.dim = 2;
    s.value = [](const Eigen::VectorXd& p) {
        const double x = p[0], y = p[1];
        return x * x * x * x / 4 - 25.0 / 12 * x * x * x + 4.5 * x * x + 12.5 * y * y;
    };
    s.gradient = [](const Eigen::VectorXd& p) {
        const double x = p[0], y = p[1];
        return vec2(x * x * x - 6.25 * x * x + 9 * x, 25 * y);
    };
    s.laplacian = [](const Eigen::VectorXd& p) {
        const double x = p[0];
        return 3 * x * x - 12.5 * x + 9 + 25;
    };
    s.box_lo = vec2(-2, -1);
    s.box_hi = vec2(6, 1);
    return s;
}

PotentialSpec triplewell2d(double beta) {
    // Two rows of Gaussians: a repulsive/attractive pair along y centered at
    // x=0, and two deep attractive wells at (+-1, 0). beta scales the whole
    // landscape. Deep minima near (+-1, 0), a shallow one near (0, 5/3).
    require(beta > 0, "triplewell2d: beta must be positive");
    PotentialSpec s;
    s.name = "triplewell2d";
    s.dim = 2;
    s.params["beta"] = beta;
    const auto g = [](double t) { return std::exp(-t * t); };
    const auto dg = [g](double t) { return -2 * t * g(t); };
    const auto ddg = [g](double t) { return (4 * t * t - 2) * g(t); };
    s.value = [=](const Eigen::VectorXd& p) {
        const double x = p[0], y = p[1];
        return 3 * beta * g(x) * (g(y - 1.0 / 3) - g(y - 5.0 / 3)) -
               5 * beta * g(y) * (g(x - 1) + g(x + 1));
    };
    s.gradient = [=](const Eigen::VectorXd& p) {
        const double x = p[0], y = p[1];
        const double ux = 3 * beta * dg(x) * (g(y - 1.0 / 3) - g(y - 5.0 / 3)) -
                          5 * beta * g(y) * (dg(x - 1) + dg(x + 1));
        const double uy = 3 * beta * g(x) * (dg(y - 1.0 / 3) - dg(y - 5.0 / 3)) -
                          5 * beta * dg(y) * (g(x - 1) + g(x + 1));
        return vec2(ux, uy);
    };
    s.laplacian = [=](const Eigen::VectorXd& p) {
        const double x = p[0], y = p[1];
        return 3 * beta * ddg(x) * (g(y - 1.0 / 3) - g(y - 5.0 / 3)) +
               3 * beta * g(x) * (ddg(y - 1.0 / 3) - ddg(y - 5.0 / 3)) -
               5 * beta * g(y) * (ddg(x - 1) + ddg(x + 1)) -
               5 * beta * ddg(y) * (g(x - 1) + g(x + 1));
    };
    s.box_lo = vec2(-2.5, -2.5);
    s.box_hi = vec2(2.5, 2.5);
    return s;
}

PotentialSpec from_string(const std::string& text) {
    const std::size_t colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::map<std::string, std::string> kv;
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            if (comma == std::string::npos) comma = rest.size();
            const std::string item = rest.substr(start, comma - start);
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos)
                throw ContractError("potential parameter '" + item + "' is not key=value");
            kv[item.substr(0, eq)] = item.substr(eq + 1);
            start = comma + 1;
        }
    }
    const auto get = [&](const std::string& key, double fallback,
                         bool required_param) -> double {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            if (required_param)
                throw ContractError("potential '" + name + "' requires parameter '" + key + "'");
            return fallback;
        }
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ContractError("potential parameter '" + key + "' has non-numeric value '" +
                                it->second + "'");
        }
    };
    if (name == "parabolic1d") return parabolic1d(get("tau", 1.0, false));
    if (name == "parabolicnd") {
        const auto it = kv.find("taus");
        if (it == kv.end()) throw ContractError("parabolicnd requires taus=v;v;...");
        std::vector<double> taus;
        std::size_t start = 0;
        const std::string& v = it->second;
        while (start <= v.size()) {
            std::size_t semi = v.find(';', start);
            if (semi == std::string::npos) semi = v.size();
            try {
                taus.push_back(std::stod(v.substr(start, semi - start)));
            } catch (const std::exception&) {
                throw ContractError("parabolicnd: bad tau '" + v.substr(start, semi - start) +
                                    "'");
            }
            start = semi + 1;
        }
        Eigen::VectorXd tv(static_cast<Eigen::Index>(taus.size()));
        for (std::size_t i = 0; i < taus.size(); ++i) tv[static_cast<Eigen::Index>(i)] = taus[i];
        return parabolic_nd(tv);
    }
    if (name == "doublewell2d") return doublewell2d();
    if (name == "triplewell2d") return triplewell2d(get("beta", 1.0, false));
    throw ContractError("unknown potential '" + name +
                        "' (catalog: parabolic1d, parabolicnd, doublewell2d, triplewell2d)");
}

}  // namespace dmapx::potentials
