#include "dmapx/analysis.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dmapx/errors.hpp"
#include "dmapx/rng.hpp"

namespace dmapx::analysis {

std::vector<int> sign_cluster(const Eigen::VectorXd& psi) {
    if (!psi.allFinite()) throw ContractError("sign_cluster: psi has non-finite entries");
    std::vector<int> labels(static_cast<std::size_t>(psi.size()));
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        labels[static_cast<std::size_t>(i)] = psi[i] > 0 ? 1 : 0;
    return labels;
}

ConfusionReport confusion_report(const std::vector<int>& pred, const std::vector<int>& truth) {
    require(pred.size() == truth.size(), "confusion_report: label vectors differ in length");
    require(!pred.empty(), "confusion_report: empty labelings");
    const int np = *std::max_element(pred.begin(), pred.end()) + 1;
    const int nt = *std::max_element(truth.begin(), truth.end()) + 1;
    require(*std::min_element(pred.begin(), pred.end()) >= 0 &&
                *std::min_element(truth.begin(), truth.end()) >= 0,
            "confusion_report: labels must be nonnegative");
    const int side = std::max(np, nt);
    require(side <= 6, "confusion_report: more than 6 label classes");

    ConfusionReport rep;
    rep.counts.assign(static_cast<std::size_t>(side),
                      std::vector<int>(static_cast<std::size_t>(side), 0));
    for (std::size_t i = 0; i < pred.size(); ++i)
        ++rep.counts[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];

    // errors(perm) = N - sum_t counts[perm(t)][t]; scan all permutations,
    // first minimum wins (next_permutation order makes ties deterministic)
    std::vector<int> perm(static_cast<std::size_t>(side));
    std::iota(perm.begin(), perm.end(), 0);
    int best = std::numeric_limits<int>::max();
    std::vector<int> best_perm = perm;
    const int total = static_cast<int>(pred.size());
    do {
        int hit = 0;
        for (int t = 0; t < side; ++t)
            hit += rep.counts[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])]
                             [static_cast<std::size_t>(t)];
        if (total - hit < best) {
            best = total - hit;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    rep.errors = best;
    rep.permutation = best_perm;
    return rep;
}

QuadraticFit quadratic_fit_r2(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                              double trim_q, const kernel::DensityEstimate& density) {
    require(u.size() == v.size(), "quadratic_fit_r2: u and v differ in length");
    require(density.q.size() == u.size(), "quadratic_fit_r2: density size mismatch");
    require(trim_q >= 0 && trim_q < 0.5, "quadratic_fit_r2: trim_q must be in [0, 0.5)");

    const Eigen::Index n = u.size();
    std::vector<double> sorted(density.q.data(), density.q.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const auto cut = static_cast<std::size_t>(trim_q * static_cast<double>(n));
    const double threshold = sorted[cut];

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (density.q[i] >= threshold) keep.push_back(i);
    if (keep.size() < 10)
        throw NumericError("quadratic_fit_r2: fewer than 10 points after density trim");

    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd design(m, 3);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const double ui = u[keep[static_cast<std::size_t>(r)]];
        design(r, 0) = ui * ui;
        design(r, 1) = ui;
        design(r, 2) = 1.0;
        rhs[r] = v[keep[static_cast<std::size_t>(r)]];
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);

    const double ss_res = (rhs - design * coef).squaredNorm();
    const double mean = rhs.mean();
    const double ss_tot = (rhs.array() - mean).square().sum();

    QuadraticFit fit;
    fit.a = coef[0];
    fit.b = coef[1];
    fit.c = coef[2];
    fit.n_used = keep.size();
    if (ss_tot < 1e-300)
        fit.r2 = ss_res < 1e-300 ? 1.0 : 0.0;
    else
        fit.r2 = 1.0 - ss_res / ss_tot;
    return fit;
}

namespace {

double lloyd(const Eigen::MatrixXd& coords, std::size_t k, rng::CounterRng& gen,
             std::vector<int>& labels, Eigen::MatrixXd& centers) {
    const Eigen::Index n = coords.rows();
    const Eigen::Index p = coords.cols();
    const auto ki = static_cast<Eigen::Index>(k);

    // k-means++ seeding
    centers.resize(ki, p);
    Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::max());
    centers.row(0) = coords.row(static_cast<Eigen::Index>(
        gen.uniform_below(static_cast<std::uint64_t>(n))));
    for (Eigen::Index c = 1; c < ki; ++c) {
        for (Eigen::Index i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i],
                                (coords.row(i) - centers.row(c - 1)).squaredNorm());
        const double total = dist2.sum();
        if (total <= 0) {
            // all remaining points coincide with chosen centers
            for (Eigen::Index r = c; r < ki; ++r) centers.row(r) = centers.row(0);
            break;
        }
        double target = gen.uniform01() * total;
        Eigen::Index pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            target -= dist2[i];
            if (target <= 0) {
                pick = i;
                break;
            }
        }
        centers.row(c) = coords.row(pick);
    }

    labels.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> prev(static_cast<std::size_t>(n), -1);
    double inertia = 0;
    for (int iter = 0; iter < 100; ++iter) {
        inertia = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int arg = 0;
            for (Eigen::Index c = 0; c < ki; ++c) {
                const double d2 = (coords.row(i) - centers.row(c)).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    arg = static_cast<int>(c);
                }
            }
            labels[static_cast<std::size_t>(i)] = arg;
            inertia += best;
        }
        if (labels == prev) break;
        prev = labels;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(ki, p);
        std::vector<long> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += coords.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (Eigen::Index c = 0; c < ki; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        // empty clusters keep their previous center
    }
    return inertia;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& coords, std::size_t k, std::uint64_t seed) {
    const Eigen::Index n = coords.rows();
    require(k >= 1, "kmeans: k must be at least 1");
    require(static_cast<Eigen::Index>(k) <= n, "kmeans: k exceeds the number of points");
    require(coords.cols() >= 1, "kmeans: need at least one coordinate");

    KMeansResult result;
    bool all_equal = true;
    for (Eigen::Index i = 1; i < n && all_equal; ++i)
        all_equal = (coords.row(i) - coords.row(0)).cwiseAbs().maxCoeff() == 0;
    if (all_equal) {
        result.labels.assign(static_cast<std::size_t>(n), 0);
        result.centers = coords.row(0);
        result.inertia = 0;
        result.degenerate = true;
        return result;
    }

    double best = std::numeric_limits<double>::max();
    for (std::uint64_t restart = 0; restart < 50; ++restart) {
        rng::CounterRng gen(rng::mix64(seed + 0x6b6d0000u) ^ restart);
        std::vector<int> labels;
        Eigen::MatrixXd centers;
        const double inertia = lloyd(coords, k, gen, labels, centers);
        if (inertia < best) {  // strict: ties keep the lowest restart index
            best = inertia;
            result.labels = std::move(labels);
            result.centers = std::move(centers);
            result.inertia = inertia;
        }
    }
    return result;
}

}  // namespace dmapx::analysis
