#include "dmapx/diffusion.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "dmapx/errors.hpp"
#include "dmapx/rng.hpp"

namespace dmapx::diffusion {

namespace {

constexpr double kDegenerateGap = 1e-10;
constexpr double kPowerTol = 1e-12;
constexpr long kPowerMaxIter = 100000;

// Re-base each group of near-equal eigenvalues by Gram-Schmidt of the
// projected coordinate axes, so degenerate subspaces come out the same
// regardless of solver path or platform.
void canonicalize_degenerate(Eigen::VectorXd& lambdas, Eigen::MatrixXd& V) {
    const Eigen::Index k = lambdas.size();
    Eigen::Index a = 0;
    while (a < k) {
        Eigen::Index b = a + 1;
        while (b < k && std::abs(lambdas[b - 1] - lambdas[b]) < kDegenerateGap) ++b;
        const Eigen::Index g = b - a;
        if (g > 1) {
            const auto W = V.middleCols(a, g);  // N x g orthonormal
            Eigen::MatrixXd basis(V.rows(), g);
            Eigen::Index made = 0;
            for (Eigen::Index axis = 0; axis < V.rows() && made < g; ++axis) {
                // projection of e_axis onto the subspace: W * W^T e_axis
                Eigen::VectorXd cand = W * W.row(axis).transpose();
                for (Eigen::Index c = 0; c < made; ++c)
                    cand -= basis.col(c).dot(cand) * basis.col(c);
                const double nrm = cand.norm();
                if (nrm > 1e-8) basis.col(made++) = cand / nrm;
            }
            if (made == g) V.middleCols(a, g) = basis;
        }
        a = b;
    }
}

// Top-k eigenpairs of the symmetric PSD matrix M by power iteration with
// orthogonal deflation; V columns come out orthonormal, lambdas descending.
void power_topk(const Eigen::MatrixXd& M, std::size_t k, Eigen::VectorXd& lambdas,
                Eigen::MatrixXd& V) {
    const Eigen::Index n = M.rows();
    lambdas.resize(static_cast<Eigen::Index>(k));
    V.resize(n, static_cast<Eigen::Index>(k));
    Eigen::VectorXd v(n), w(n);
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(k); ++a) {
        rng::CounterRng gen(0x9e1a0000u + static_cast<std::uint64_t>(a));
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gen.normal();
        for (Eigen::Index c = 0; c < a; ++c) v -= V.col(c).dot(v) * V.col(c);
        v.normalize();
        double lam = 0;
        bool converged = false;
        for (long iter = 0; iter < kPowerMaxIter; ++iter) {
            w.noalias() = M * v;
            for (Eigen::Index c = 0; c < a; ++c) w -= V.col(c).dot(w) * V.col(c);
            lam = v.dot(w);
            if ((w - lam * v).lpNorm<Eigen::Infinity>() <= kPowerTol) {
                converged = true;
                break;
            }
            const double nrm = w.norm();
            if (nrm < 1e-300)
                throw NumericError("eigensolver: deflated iterate vanished at pair " +
                                   std::to_string(a));
            v = w / nrm;
        }
        if (!converged)
            throw NumericError("eigensolver: pair " + std::to_string(a) +
                               " did not reach residual 1e-12 within " +
                               std::to_string(kPowerMaxIter) + " iterations");
        V.col(a) = v;
        lambdas[a] = lam;
    }
}

}  // namespace

Eigen::MatrixXd MarkovEnsemble::backward_matrix() const {
    return d.cwiseInverse().asDiagonal() * K_alpha;
}

MarkovEnsemble anisotropic_normalize(const kernel::KernelMatrix& km,
                                     const kernel::DensityEstimate& qe, double alpha) {
    require(alpha >= 0 && alpha <= 1, "anisotropic_normalize: alpha must be in [0,1]");
    const Eigen::Index n = km.K.rows();
    require(qe.q.size() == n, "anisotropic_normalize: density size mismatch");
    require((qe.q.array() > 0).all(), "anisotropic_normalize: density must be positive");

    MarkovEnsemble ens;
    const Eigen::VectorXd w = qe.q.array().pow(-alpha);
    // Each unordered pair is computed once and mirrored so symmetry is bitwise.
    ens.K_alpha.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = km.K(i, j) * w[i] * w[j];
            ens.K_alpha(i, j) = v;
            ens.K_alpha(j, i) = v;
        }
    }

    ens.d.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0;
        for (Eigen::Index j = 0; j < n; ++j) acc += ens.K_alpha(i, j);
        ens.d[i] = acc;
        if (!(acc >= 1e-300))
            throw NumericError("anisotropic_normalize: point " + std::to_string(i) +
                               " is isolated (zero degree); increase epsilon");
    }

    const Eigen::VectorXd dis = ens.d.array().rsqrt();
    ens.M_s.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = ens.K_alpha(i, j) * dis[i] * dis[j];
            ens.M_s(i, j) = v;
            ens.M_s(j, i) = v;
        }
    }

    ens.pi = ens.d / ens.d.sum();
    return ens;
}

SpectralDecomposition spectral_decompose(const MarkovEnsemble& ens, std::size_t k) {
    const Eigen::Index n = ens.size();
    require(k >= 1 && static_cast<Eigen::Index>(k) <= n,
            "spectral_decompose: k must be in [1, N]");

    Eigen::VectorXd lambdas;
    Eigen::MatrixXd V;
    if (n <= 2000) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ens.M_s);
        if (solver.info() != Eigen::Success)
            throw NumericError("spectral_decompose: dense eigensolver failed");
        lambdas.resize(static_cast<Eigen::Index>(k));
        V.resize(n, static_cast<Eigen::Index>(k));
        for (std::size_t a = 0; a < k; ++a) {
            const Eigen::Index src = n - 1 - static_cast<Eigen::Index>(a);  // ascending order
            lambdas[static_cast<Eigen::Index>(a)] = solver.eigenvalues()[src];
            V.col(static_cast<Eigen::Index>(a)) = solver.eigenvectors().col(src);
        }
    } else {
        power_topk(ens.M_s, k, lambdas, V);
    }

    canonicalize_degenerate(lambdas, V);

    SpectralDecomposition dec;
    dec.lambdas = lambdas;
    const double root_s = std::sqrt(ens.d.sum());
    const Eigen::VectorXd to_psi = ens.d.array().rsqrt() * root_s;
    const Eigen::VectorXd to_phi = ens.d.array().sqrt() / root_s;
    dec.psi.resize(n, static_cast<Eigen::Index>(k));
    dec.phi.resize(n, static_cast<Eigen::Index>(k));
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(k); ++a) {
        Eigen::VectorXd psi = V.col(a).cwiseProduct(to_psi);
        // sign convention: the largest-|entry| coordinate positive, ties by
        // lowest index (strict > keeps the first maximal entry)
        Eigen::Index arg = 0;
        double best = std::abs(psi[0]);
        for (Eigen::Index i = 1; i < n; ++i)
            if (std::abs(psi[i]) > best) {
                best = std::abs(psi[i]);
                arg = i;
            }
        const double sign = psi[arg] < 0 ? -1.0 : 1.0;
        dec.psi.col(a) = sign * psi;
        dec.phi.col(a) = sign * V.col(a).cwiseProduct(to_phi);
    }
    return dec;
}

DiffusionEmbedding embed(const SpectralDecomposition& dec, std::size_t m) {
    const Eigen::Index k = dec.lambdas.size();
    DiffusionEmbedding out;
    out.coords.resize(dec.psi.rows(), k - 1);
    for (Eigen::Index j = 1; j < k; ++j) {
        double scale = 1.0;
        for (std::size_t t = 0; t < m; ++t) scale *= dec.lambdas[j];
        out.coords.col(j - 1) = scale * dec.psi.col(j);
    }
    return out;
}

double diffusion_distance(const MarkovEnsemble& ens, const SpectralDecomposition& dec,
                          Eigen::Index i, Eigen::Index j, std::size_t m) {
    const Eigen::Index n = ens.size();
    require(i >= 0 && i < n && j >= 0 && j < n, "diffusion_distance: id out of range");
    require(m >= 1, "diffusion_distance: m must be at least 1");
    double acc = 0;
    for (Eigen::Index a = 1; a < dec.lambdas.size(); ++a) {
        double scale = 1.0;
        for (std::size_t t = 0; t < m; ++t) scale *= dec.lambdas[a];
        const double diff = dec.psi(i, a) - dec.psi(j, a);
        acc += scale * scale * diff * diff;
    }
    return std::sqrt(acc);
}

Eigen::VectorXd apply_discrete_generator(const MarkovEnsemble& ens, const Eigen::VectorXd& f,
                                         double epsilon) {
    const Eigen::Index n = ens.size();
    require(f.size() == n, "apply_discrete_generator: f length mismatch");
    require(epsilon > 0, "apply_discrete_generator: epsilon must be positive");
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // K_alpha is symmetric, so column i doubles as row i (contiguous scan)
        const double fi = f[i];
        double acc = 0;
        const double* col = ens.K_alpha.col(i).data();
        for (Eigen::Index j = 0; j < n; ++j) acc += col[j] * (f[j] - fi);
        out[i] = acc / (ens.d[i] * epsilon);
    }
    return out;
}

}  // namespace dmapx::diffusion
