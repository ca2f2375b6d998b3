#include <doctest.h>

#include <dmapx/diffusion.hpp>
#include <dmapx/errors.hpp>
#include <dmapx/kernel.hpp>
#include <dmapx/oracles.hpp>
#include <dmapx/rng.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

using dmapx::dataset::PointCloud;
using dmapx::diffusion::MarkovEnsemble;
using dmapx::diffusion::SpectralDecomposition;
using dmapx::kernel::KernelParams;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

PointCloud random_cloud(int n, int d, std::uint64_t seed) {
    dmapx::rng::CounterRng gen(seed);
    PointCloud c;
    c.points.resize(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) c.points(i, j) = gen.normal();
    return c;
}

MarkovEnsemble make_ensemble(const PointCloud& cloud, double epsilon, double alpha) {
    KernelParams p;
    p.epsilon = epsilon;
    auto K = dmapx::kernel::gaussian_kernel_matrix(cloud, p);
    auto q = dmapx::kernel::density_estimate(K);
    return dmapx::diffusion::anisotropic_normalize(K, q, alpha);
}

PointCloud two_points(double dist) {
    PointCloud c;
    c.points.resize(2, 1);
    c.points << 0.0, dist;
    return c;
}

// Three pairwise-equidistant points in the plane.
PointCloud equilateral(double side) {
    PointCloud c;
    c.points.resize(3, 2);
    c.points << 0.0, 0.0, side, 0.0, side / 2, side * std::sqrt(3.0) / 2;
    return c;
}

}  // namespace

TEST_CASE("two-point chain matches the closed form at any alpha") {
    const double eps = 0.5;
    const double w = std::exp(-1.0 / (2 * eps));
    for (double alpha : {0.0, 0.3, 1.0}) {
        auto ens = make_ensemble(two_points(1.0), eps, alpha);
        auto M_b = ens.backward_matrix();
        // Equal densities cancel, so every alpha gives the same chain.
        CHECK(M_b(0, 0) == doctest::Approx(1.0 / (1.0 + w)).epsilon(1e-14));
        CHECK(M_b(0, 1) == doctest::Approx(w / (1.0 + w)).epsilon(1e-14));
        CHECK(M_b(1, 0) == doctest::Approx(w / (1.0 + w)).epsilon(1e-14));
        auto dec = dmapx::diffusion::spectral_decompose(ens, 2);
        CHECK(dec.lambdas[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dec.lambdas[1] ==
              doctest::Approx((1.0 - w) / (1.0 + w)).epsilon(1e-12));
    }
}

TEST_CASE("uniform density makes the normalization alpha-independent") {
    auto cloud = equilateral(0.9);
    auto a0 = make_ensemble(cloud, 0.4, 0.0).backward_matrix();
    auto a1 = make_ensemble(cloud, 0.4, 1.0).backward_matrix();
    auto ah = make_ensemble(cloud, 0.4, 0.5).backward_matrix();
    CHECK((a0 - a1).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((a0 - ah).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("alpha zero leaves the affinities untouched") {
    auto cloud = random_cloud(30, 2, 51);
    KernelParams p;
    p.epsilon = 0.6;
    auto K = dmapx::kernel::gaussian_kernel_matrix(cloud, p);
    auto q = dmapx::kernel::density_estimate(K);
    auto ens = dmapx::diffusion::anisotropic_normalize(K, q, 0.0);
    CHECK((ens.K_alpha - K.K).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 30; ++i)
        CHECK(ens.d[i] == doctest::Approx(q.q[i]).epsilon(1e-15));
}

TEST_CASE("markov ensemble structural invariants") {
    auto cloud = random_cloud(50, 3, 53);
    auto ens = make_ensemble(cloud, 0.7, 0.5);
    auto M_b = ens.backward_matrix();

    // Row stochastic.
    VectorXd rowsums = M_b.rowwise().sum();
    CHECK((rowsums.array() - 1.0).abs().maxCoeff() <= 1e-12);

    // pi is a probability vector and stationary: pi^T M_b = pi^T.
    CHECK(ens.pi.minCoeff() > 0.0);
    CHECK(ens.pi.sum() == doctest::Approx(1.0).epsilon(1e-13));
    VectorXd piM = M_b.transpose() * ens.pi;
    CHECK((piM - ens.pi).cwiseAbs().maxCoeff() <= 1e-12);

    // Detailed balance: pi_i M_b(i,j) symmetric.
    for (int i = 0; i < 50; ++i)
        for (int j = i + 1; j < 50; ++j)
            CHECK(std::abs(ens.pi[i] * M_b(i, j) - ens.pi[j] * M_b(j, i)) <= 1e-15);

    // K_alpha and M_s are bitwise symmetric (pairs computed once, mirrored).
    CHECK((ens.K_alpha - ens.K_alpha.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ens.M_s - ens.M_s.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral decomposition invariants on a random cloud") {
    auto cloud = random_cloud(60, 2, 57);
    auto ens = make_ensemble(cloud, 0.8, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 6);
    auto M_b = ens.backward_matrix();

    // Leading eigenvalue 1, all in [-1, 1], sorted descending.
    CHECK(std::abs(dec.lambdas[0] - 1.0) <= 1e-12);
    for (int a = 0; a < 6; ++a) {
        CHECK(std::abs(dec.lambdas[a]) <= 1.0 + 1e-12);
        if (a > 0) CHECK(dec.lambdas[a] <= dec.lambdas[a - 1] + 1e-14);
    }

    // psi_0 is the constant 1.
    CHECK((dec.psi.col(0).array() - 1.0).abs().maxCoeff() <= 1e-8);

    // Right eigenvectors of M_b.
    for (int a = 0; a < 6; ++a) {
        VectorXd resid = M_b * dec.psi.col(a) - dec.lambdas[a] * dec.psi.col(a);
        CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8);
    }

    // Left eigenvectors of M_b.
    for (int a = 0; a < 6; ++a) {
        VectorXd resid = M_b.transpose() * dec.phi.col(a) - dec.lambdas[a] * dec.phi.col(a);
        CHECK(resid.cwiseAbs().maxCoeff() <= 1e-10);
    }

    // pi-weighted orthonormality of psi; phi = pi .* psi.
    for (int a = 0; a < 6; ++a) {
        for (int b = a; b < 6; ++b) {
            double dot = (ens.pi.array() * dec.psi.col(a).array() *
                          dec.psi.col(b).array())
                             .sum();
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-10);
        }
        CHECK((dec.phi.col(a).array() - ens.pi.array() * dec.psi.col(a).array())
                  .abs()
                  .maxCoeff() <= 1e-12);
    }

    // Sign convention: the largest-|value| entry of each psi is positive.
    for (int a = 0; a < 6; ++a) {
        Eigen::Index argmax = 0;
        dec.psi.col(a).cwiseAbs().maxCoeff(&argmax);
        CHECK(dec.psi(argmax, a) > 0.0);
    }
}

TEST_CASE("three equidistant points have a degenerate pair matching brute force") {
    auto ens = make_ensemble(equilateral(0.8), 0.5, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 3);
    const double w = std::exp(-0.64 / (2 * 0.5));
    const double mu = (1.0 - w) / (1.0 + 2 * w);
    CHECK(dec.lambdas[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dec.lambdas[1] == doctest::Approx(mu).epsilon(1e-9));
    CHECK(dec.lambdas[2] == doctest::Approx(mu).epsilon(1e-9));

    auto brute = dmapx::oracles::brute_force_spectrum(ens.backward_matrix());
    for (int a = 0; a < 3; ++a)
        CHECK(dec.lambdas[a] == doctest::Approx(brute[a]).epsilon(1e-9));

    // Degenerate pair is still a valid pi-orthonormal eigenbasis, and the
    // canonicalization is reproducible.
    auto again = dmapx::diffusion::spectral_decompose(ens, 3);
    CHECK((dec.psi - again.psi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decomposition agrees with brute force on a nonuniform cloud") {
    auto cloud = random_cloud(6, 1, 61);
    auto ens = make_ensemble(cloud, 0.9, 0.3);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 6);
    auto brute = dmapx::oracles::brute_force_spectrum(ens.backward_matrix());
    REQUIRE(brute.size() == 6);
    for (int a = 0; a < 6; ++a)
        CHECK(dec.lambdas[a] == doctest::Approx(brute[a]).epsilon(1e-9));
}

TEST_CASE("requesting an invalid eigenpair count fails") {
    auto ens = make_ensemble(equilateral(1.0), 0.5, 0.5);
    CHECK_THROWS_AS(dmapx::diffusion::spectral_decompose(ens, 0),
                    dmapx::ContractError);
    CHECK_THROWS_AS(dmapx::diffusion::spectral_decompose(ens, 4),
                    dmapx::ContractError);
}

TEST_CASE("crafted density overflow triggers the disconnect diagnostic") {
    // A kernel this small cannot occur from gaussian_kernel_matrix (diagonal
    // is 1), but anisotropic_normalize must still refuse to divide by a
    // vanishing degree instead of emitting NaNs.
    dmapx::kernel::KernelMatrix K;
    K.K = MatrixXd::Constant(2, 2, 1e-320);
    dmapx::kernel::DensityEstimate q;
    q.q = VectorXd::Constant(2, 1e160);
    CHECK_THROWS_AS(dmapx::diffusion::anisotropic_normalize(K, q, 1.0),
                    dmapx::NumericError);
}

TEST_CASE("embedding columns scale as lambda^m psi") {
    auto cloud = random_cloud(40, 2, 63);
    auto ens = make_ensemble(cloud, 0.7, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 4);

    auto e0 = dmapx::diffusion::embed(dec, 0);
    REQUIRE(e0.coords.cols() == 3);
    for (int j = 1; j < 4; ++j)
        CHECK((e0.coords.col(j - 1) - dec.psi.col(j)).cwiseAbs().maxCoeff() == 0.0);

    auto e2 = dmapx::diffusion::embed(dec, 2);
    for (int j = 1; j < 4; ++j) {
        double s = dec.lambdas[j] * dec.lambdas[j];
        CHECK((e2.coords.col(j - 1) - s * dec.psi.col(j)).cwiseAbs().maxCoeff() <=
              1e-15);
    }

    // Large m shrinks nontrivial components toward zero.
    auto e200 = dmapx::diffusion::embed(dec, 200);
    CHECK(e200.coords.cwiseAbs().maxCoeff() <=
          std::pow(std::abs(dec.lambdas[1]), 200) * dec.psi.cwiseAbs().maxCoeff() +
              1e-300);
}

TEST_CASE("embedding column norms are nonincreasing at positive time") {
    auto cloud = random_cloud(45, 3, 67);
    auto ens = make_ensemble(cloud, 1.0, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 5);
    auto emb = dmapx::diffusion::embed(dec, 10);
    // At m = 10 any sign structure in the spectrum is dominated; psi columns
    // have equal pi-weighted norm, so |lambda|^m ordering decides.
    for (int j = 1; j < emb.coords.cols(); ++j) {
        double prev = emb.coords.col(j - 1).norm();
        double cur = emb.coords.col(j).norm();
        CHECK(cur <= prev * (1.0 + 1e-10) + 1e-300);
    }
}

TEST_CASE("diffusion distance with the full spectrum equals the chain-power form") {
    auto cloud = random_cloud(50, 2, 71);
    auto ens = make_ensemble(cloud, 0.8, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 50);
    auto M_b = ens.backward_matrix();

    dmapx::rng::CounterRng gen(5);
    MatrixXd power = M_b;
    for (std::size_t m : {1u, 2u, 3u}) {
        if (m > 1) power = (power * M_b).eval();
        for (int rep = 0; rep < 5; ++rep) {
            auto i = static_cast<Eigen::Index>(gen.uniform_below(50));
            auto j = static_cast<Eigen::Index>(gen.uniform_below(50));
            double direct = 0.0;
            for (int l = 0; l < 50; ++l) {
                double diff = power(i, l) - power(j, l);
                direct += diff * diff / ens.pi[l];
            }
            direct = std::sqrt(direct);
            double spectral = dmapx::diffusion::diffusion_distance(ens, dec, i, j, m);
            CHECK(std::abs(spectral - direct) <= 1e-8);
        }
    }
}

TEST_CASE("truncated diffusion distance is a lower bound") {
    auto cloud = random_cloud(50, 2, 73);
    auto ens = make_ensemble(cloud, 0.8, 0.5);
    auto full = dmapx::diffusion::spectral_decompose(ens, 50);
    auto trunc = dmapx::diffusion::spectral_decompose(ens, 5);
    for (int i = 0; i < 10; ++i) {
        double lo = dmapx::diffusion::diffusion_distance(ens, trunc, i, i + 20, 1);
        double hi = dmapx::diffusion::diffusion_distance(ens, full, i, i + 20, 1);
        CHECK(lo <= hi + 1e-12);
    }
    CHECK(dmapx::diffusion::diffusion_distance(ens, full, 7, 7, 2) == 0.0);
}

TEST_CASE("discrete generator maps constants to exact zero") {
    auto cloud = random_cloud(35, 2, 79);
    auto ens = make_ensemble(cloud, 0.6, 1.0);
    VectorXd f = VectorXd::Constant(35, 3.75);
    VectorXd g = dmapx::diffusion::apply_discrete_generator(ens, f, 0.6);
    for (int i = 0; i < 35; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("discrete generator satisfies the eigen relation") {
    auto cloud = random_cloud(40, 1, 83);
    const double eps = 0.5;
    auto ens = make_ensemble(cloud, eps, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 3);
    VectorXd psi1 = dec.psi.col(1);
    VectorXd want = ((dec.lambdas[1] - 1.0) / eps) * psi1;
    VectorXd got = dmapx::diffusion::apply_discrete_generator(ens, psi1, eps);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("discrete generator validates its inputs") {
    auto ens = make_ensemble(equilateral(1.0), 0.5, 0.5);
    VectorXd f = VectorXd::Ones(2);
    CHECK_THROWS_AS(dmapx::diffusion::apply_discrete_generator(ens, f, 0.5),
                    dmapx::ContractError);
    VectorXd f3 = VectorXd::Ones(3);
    CHECK_THROWS_AS(dmapx::diffusion::apply_discrete_generator(ens, f3, 0.0),
                    dmapx::ContractError);
}

TEST_CASE("iterative path used above the dense cutoff matches a direct solve") {
    // N = 2050 forces the deflated power iteration; an independent dense
    // solve of the same symmetric matrix provides the reference.
    auto cloud = random_cloud(2050, 1, 89);
    auto ens = make_ensemble(cloud, 0.5, 0.5);
    auto dec = dmapx::diffusion::spectral_decompose(ens, 3);

    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(ens.M_s);
    const auto& ev = solver.eigenvalues();  // ascending
    VectorXd dis = ens.d.array().rsqrt().matrix();
    const double root_s = std::sqrt(ens.d.sum());
    for (int a = 0; a < 3; ++a) {
        double lam_ref = ev[ev.size() - 1 - a];
        CHECK(std::abs(dec.lambdas[a] - lam_ref) <= 1e-10);
        VectorXd v_ref = solver.eigenvectors().col(ev.size() - 1 - a);
        VectorXd psi_ref = root_s * (dis.array() * v_ref.array()).matrix();
        double overlap = std::abs(psi_ref.dot(
            (ens.pi.array() * dec.psi.col(a).array()).matrix()));
        CHECK(overlap == doctest::Approx(1.0).epsilon(1e-6));
    }
}
