#include "dmapx/sampler.hpp"

#include <cmath>

#include "dmapx/errors.hpp"
#include "dmapx/rng.hpp"

namespace dmapx::sampler {

dataset::PointCloud langevin_sample(const potentials::PotentialSpec& spec,
                                    const SamplerConfig& cfg) {
    require(cfg.dt > 0, "langevin_sample: dt must be positive");
    require(cfg.thin >= 1, "langevin_sample: thin must be at least 1");
    require(cfg.n_keep >= 1, "langevin_sample: n_keep must be at least 1");
    require(cfg.burn_in >= 0, "langevin_sample: burn_in must be nonnegative");
    require(cfg.x0.size() == spec.dim, "langevin_sample: x0 dimension mismatch");
    if (cfg.box) {
        require(cfg.box->lo.size() == spec.dim && cfg.box->hi.size() == spec.dim,
                "langevin_sample: box dimension mismatch");
        require(cfg.box->contains(cfg.x0), "langevin_sample: x0 outside the box");
    }

    rng::CounterRng gen(cfg.seed);
    const Eigen::Index d = spec.dim;
    const double noise = std::sqrt(2 * cfg.dt) * cfg.noise_scale;
    Eigen::VectorXd x = cfg.x0;
    Eigen::VectorXd xi(d), prop(d);
    Eigen::MatrixXd out(cfg.n_keep, d);

    const std::int64_t total = cfg.burn_in + cfg.thin * cfg.n_keep;
    std::int64_t kept = 0;
    for (std::int64_t step = 1; step <= total; ++step) {
        const Eigen::VectorXd g = spec.gradient(x);
        const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
        if (g.cwiseAbs().maxCoeff() * cfg.dt > 10 * scale)
            throw NumericError("step-size blowup at step " + std::to_string(step) +
                               ": |grad U| * dt exceeds 10x the coordinate scale; "
                               "reduce dt");
        for (Eigen::Index c = 0; c < d; ++c) xi[c] = gen.normal();
        prop = x - g * cfg.dt + noise * xi;
        if (!cfg.box || cfg.box->contains(prop)) x = prop;
        if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0) out.row(kept++) = x;
    }
    return dataset::PointCloud{std::move(out)};
}

dataset::PointCloud gaussian_direct_sample(const Eigen::VectorXd& taus, std::size_t n,
                                           std::uint64_t seed) {
    require(n >= 1, "gaussian_direct_sample: n must be at least 1");
    require(taus.size() >= 1 && (taus.array() > 0).all(),
            "gaussian_direct_sample: every tau must be positive");
    rng::CounterRng gen(seed);
    const Eigen::VectorXd sd = taus.array().sqrt();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), taus.size());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = sd[j] * gen.normal();
    return dataset::PointCloud{std::move(out)};
}

}  // namespace dmapx::sampler
