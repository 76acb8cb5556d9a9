#include "hloss/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hloss/loss.hpp"
#include "hloss/metrics.hpp"
#include "hloss/oracle.hpp"
#include "hloss/shapes.hpp"
#include "hloss/weighting.hpp"

namespace hloss::verify {

namespace {

constexpr double kBalanceQs[] = {0.25, 0.5, 0.9, 1.0, 1.2, 2.0, 5.0};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

CheckResult make_result(std::string name, double worst, double tol, std::string detail) {
    CheckResult r;
    r.name = std::move(name);
    r.worst = worst;
    r.passed = worst <= tol;
    r.detail = std::move(detail) + ", worst " + sci(worst) + " (tol " + sci(tol) + ")";
    return r;
}

/// Flat-ish Dirichlet(1) draw mixed with the uniform so every entry is at
/// least 0.1 / K.
Eigen::VectorXd interior_distribution(Rng& rng, int K) {
    Eigen::VectorXd p(K);
    for (int k = 0; k < K; ++k) p[k] = -std::log(1.0 - rng.uniform());
    p /= p.sum();
    return 0.9 * p + Eigen::VectorXd::Constant(K, 0.1 / K);
}

Eigen::VectorXd random_distribution(Rng& rng, int K) {
    Eigen::VectorXd p(K);
    for (int k = 0; k < K; ++k) p[k] = -std::log(1.0 - rng.uniform());
    return p / p.sum();
}

Eigen::VectorXd random_logits(Rng& rng, int K, double scale) {
    Eigen::VectorXd z(K);
    for (int k = 0; k < K; ++k) z[k] = scale * rng.normal();
    return z;
}

Hierarchy random_small_tree(Rng& rng, int max_nodes, int max_leaves) {
    while (true) {
        Hierarchy h = random_hierarchy(rng, max_nodes);
        if (h.leaf_count() >= 2 && h.leaf_count() <= max_leaves) return h;
    }
}

double path_sum(const WeightedHierarchy& wh, const std::vector<NodeId>& nodes) {
    double s = 0.0;
    for (NodeId j : nodes) s += wh.weight(j);
    return s;
}

std::vector<NodeId> ancestors_or_empty(const Hierarchy& h, NodeId j) {
    return j == kRoot ? std::vector<NodeId>{} : h.ancestors(j);
}

} // namespace

CheckResult check_balance(const Scale& scale, Rng rng, bool corrupt) {
    double worst = 0.0;
    for (int t = 0; t < scale.random_trees; ++t) {
        const Hierarchy h = random_hierarchy(rng, 50);
        for (double q : kBalanceQs) {
            WeightedHierarchy wh = exponential_weights(h, q);
            if (corrupt && t == 0 && q == 1.0) {
                Eigen::VectorXd w = wh.weights();
                w[1] += 0.01;
                wh = WeightedHierarchy(h, w, 0.5);
            }
            for (NodeId k = 1; k <= h.leaf_count(); ++k) {
                worst = std::max(worst, std::abs(path_sum(wh, h.ancestors(k)) - 0.5));
            }
        }
    }
    return make_result("balance", worst, kBalanceTol,
                       std::to_string(scale.random_trees) + " random trees x 7 q values");
}

CheckResult check_reference_weights() {
    const Hierarchy h = seven_leaf_taxonomy();
    double worst = 0.0;
    for (double q : {0.9, 1.0, 1.2}) {
        const double a = 2.0 * (1.0 + q);
        const double b = 2.0 * (1.0 + q + q * q);
        Eigen::VectorXd expected(11);
        expected << 0.0, 0.5, q / a, q / a, q / a, q * (1.0 + q) / b, q * q / b, q * q / b,
            1.0 / a, q / b, 1.0 / b;
        const WeightedHierarchy wh = exponential_weights(h, q);
        worst = std::max(worst, (wh.weights() - expected).cwiseAbs().maxCoeff());
    }
    return make_result("reference-weights", worst, kReferenceWeightTol,
                       "seven-leaf taxonomy at q in {0.9, 1, 1.2}");
}

CheckResult check_proper_scoring(const Scale& scale, Rng rng) {
    std::vector<Hierarchy> trees = enumerate_tree_shapes(6, 4);
    trees.push_back(seven_leaf_taxonomy());
    double worst = 0.0;
    long solves = 0;
    int failures = 0;
    for (const Hierarchy& h : trees) {
        const int K = h.leaf_count();
        const std::vector<WeightedHierarchy> schemes = {
            exponential_weights(h, 0.9), exponential_weights(h, 1.2),
            hxe_weights(h, 0.1, false), hxe_weights(h, 0.5, false)};
        for (const WeightedHierarchy& wh : schemes) {
            for (int draw = 0; draw < scale.pi_draws; ++draw) {
                const Eigen::VectorXd pi = interior_distribution(rng, K);
                std::vector<oracle::SimplexMinOptions> runs(1);
                if (draw == 0) {
                    for (int s = 0; s < 5; ++s) {
                        oracle::SimplexMinOptions o;
                        o.start = interior_distribution(rng, K);
                        runs.push_back(o);
                    }
                }
                for (const auto& options : runs) {
                    const auto result = oracle::minimize_expected_loss(wh, pi, options);
                    ++solves;
                    if (!result.converged) ++failures;
                    worst = std::max(worst, (result.minimizer - pi).cwiseAbs().maxCoeff());
                }
            }
        }
    }
    CheckResult r = make_result("proper-scoring", worst, kProperScoringTol,
                                std::to_string(trees.size()) + " trees x 4 schemes, " +
                                    std::to_string(solves) + " minimizations");
    if (failures > 0) {
        r.passed = false;
        r.detail += ", " + std::to_string(failures) + " did not converge";
    }
    return r;
}

CheckResult check_naive_counterexample() {
    const Hierarchy h = three_leaf_tree();
    Eigen::VectorXd unit = Eigen::VectorXd::Ones(h.node_count());
    unit[kRoot] = 0.0;
    const WeightedHierarchy wh(h, unit, 1.0);
    const Eigen::VectorXd pi = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    const auto result = oracle::minimize_expected_loss(wh, pi);
    Eigen::VectorXd expected(3);
    expected << 0.2, 0.4, 0.4;
    const double error = (result.minimizer - expected).cwiseAbs().maxCoeff();
    const double gap = (result.minimizer - pi).cwiseAbs().maxCoeff();
    char buf[128];
    std::snprintf(buf, sizeof buf, "minimizer (%.6f, %.6f, %.6f), distance to labels %.6f",
                  result.minimizer[0], result.minimizer[1], result.minimizer[2], gap);
    CheckResult r = make_result("naive-not-proper", error, kNaiveTol, buf);
    r.passed = r.passed && result.converged && gap >= 0.1;
    return r;
}

CheckResult check_hxe_equivalence(const Scale& scale, Rng rng) {
    double worst_loss = 0.0;
    double worst_balance = 0.0;
    for (int draw = 0; draw < scale.draws; ++draw) {
        const Hierarchy h = random_hierarchy(rng, 50);
        const double alpha = rng.uniform(0.05, 2.0);
        const Eigen::VectorXd z = random_logits(rng, h.leaf_count(), 3.0);
        const NodeId y = rng.uniform_int(1, h.leaf_count());
        const WeightedHierarchy raw = hxe_weights(h, alpha, false);
        worst_loss = std::max(worst_loss,
                              std::abs(hxe_loss(h, z, y, alpha) - hierarchical_loss(raw, z, y)));
        for (NodeId k = 1; k <= h.leaf_count(); ++k) {
            worst_balance = std::max(
                worst_balance, std::abs(path_sum(raw, h.ancestors(k)) - std::exp(-alpha)));
        }
    }
    CheckResult r = make_result("hxe-equivalence", worst_loss, kHxeLossTol,
                                std::to_string(scale.draws) + " draws, path sums off by " +
                                    sci(worst_balance));
    r.passed = r.passed && worst_balance <= kBalanceTol;
    return r;
}

CheckResult check_flat_reduction(const Scale& scale, Rng rng) {
    double worst = 0.0;
    for (int draw = 0; draw < scale.draws; ++draw) {
        const int K = rng.uniform_int(2, 20);
        const Hierarchy h = flat_hierarchy(K);
        const WeightedHierarchy wh = exponential_weights(h, rng.uniform(0.1, 5.0));
        const Eigen::VectorXd z = random_logits(rng, K, 2.0);
        const NodeId y = rng.uniform_int(1, K);
        // Cross-entropy from the normalized probability, independent of log-sum-exp.
        const Eigen::ArrayXd e = (z.array() - z.maxCoeff()).exp();
        const double ce = -std::log(e[y - 1] / e.sum());
        worst = std::max(worst, std::abs(hierarchical_loss(wh, z, y) - 0.5 * ce));
    }
    return make_result("flat-reduction", worst, kFlatTol, std::to_string(scale.draws) + " draws");
}

CheckResult check_gradient(const Scale& scale, Rng rng) {
    constexpr double qs[] = {0.5, 0.9, 1.0, 1.2, 2.0};
    double worst = 0.0;
    for (int draw = 0; draw < scale.draws; ++draw) {
        const Hierarchy h = random_small_tree(rng, 30, 30);
        const WeightedHierarchy wh = exponential_weights(h, qs[draw % 5]);
        const int K = h.leaf_count();
        Eigen::VectorXd z = random_logits(rng, K, 2.0);
        const NodeId y = rng.uniform_int(1, K);
        if (draw % 4 == 3) z[y - 1] = z.maxCoeff() + rng.uniform(5.0, 9.0);  // near one-hot
        const Eigen::VectorXd analytic = hierarchical_loss_grad(wh, z, y);
        Eigen::VectorXd numeric(K);
        for (int m = 0; m < K; ++m) {
            Eigen::VectorXd up = z, down = z;
            up[m] += kFiniteDifferenceStep;
            down[m] -= kFiniteDifferenceStep;
            numeric[m] = (hierarchical_loss(wh, up, y) - hierarchical_loss(wh, down, y)) /
                         (2.0 * kFiniteDifferenceStep);
        }
        const double scale_norm = std::max({analytic.norm(), numeric.norm(), 1e-300});
        worst = std::max(worst, (analytic - numeric).norm() / scale_norm);
    }
    return make_result("gradient", worst, kGradientTol,
                       std::to_string(scale.draws) + " draws, central differences");
}

CheckResult check_wasserstein(const Scale& scale, Rng rng) {
    constexpr double qs[] = {1.0, 0.9, 1.2, 2.0, 0.5};
    double worst_closed = 0.0;
    double worst_lp = 0.0;
    for (int t = 0; t < scale.ot_trees; ++t) {
        const Hierarchy h = t == 0 ? seven_leaf_taxonomy() : random_small_tree(rng, 14, 8);
        const WeightedHierarchy wh = exponential_weights(h, qs[t % 5]);
        const int K = h.leaf_count();
        for (int pair = 0; pair < scale.ot_pairs; ++pair) {
            const Eigen::VectorXd f = random_distribution(rng, K);
            const NodeId y = rng.uniform_int(1, K);
            Eigen::VectorXd point = Eigen::VectorXd::Zero(K);
            point[y - 1] = 1.0;
            const double closed = tree_wasserstein(wh, f, y);
            const double general =
                tree_wasserstein_general(wh, lift_to_nodes(h, f), lift_to_nodes(h, point));
            const double lp = oracle::ot_lp(wh, f, point);
            worst_closed = std::max(worst_closed, std::abs(closed - general));
            worst_lp = std::max({worst_lp, std::abs(closed - lp), std::abs(general - lp)});

            const Eigen::VectorXd g = random_distribution(rng, K);
            const double general_pair =
                tree_wasserstein_general(wh, lift_to_nodes(h, f), lift_to_nodes(h, g));
            worst_lp = std::max(worst_lp, std::abs(general_pair - oracle::ot_lp(wh, f, g)));
        }
    }
    CheckResult r = make_result("wasserstein", worst_closed, kClosedFormTol,
                                std::to_string(scale.ot_trees) + " trees x " +
                                    std::to_string(scale.ot_pairs) + " pairs, LP gap " +
                                    sci(worst_lp) + " (tol " + sci(kTransportTol) + ")");
    r.passed = r.passed && worst_lp <= kTransportTol;
    return r;
}

CheckResult check_tree_metric(const Scale& scale, Rng rng) {
    std::vector<Hierarchy> trees = enumerate_tree_shapes(6, 5);
    trees.push_back(seven_leaf_taxonomy());
    for (int t = 0; t < scale.metric_random_trees; ++t) trees.push_back(random_hierarchy(rng, 40));
    constexpr double qs[] = {0.5, 0.9, 1.0, 1.2, 2.0};
    double worst = 0.0;
    double worst_root = 0.0;
    long pairs = 0;
    for (std::size_t t = 0; t < trees.size(); ++t) {
        const Hierarchy& h = trees[t];
        const WeightedHierarchy wh = exponential_weights(h, qs[t % 5]);
        for (NodeId a = 1; a <= h.leaf_count(); ++a) {
            worst_root = std::max(worst_root, std::abs(oracle::bfs_distance(wh, a, kRoot) - 0.5));
            const auto path_a = h.ancestors(a);
            for (NodeId b = 1; b <= h.leaf_count(); ++b) {
                const double shortest = oracle::bfs_distance(wh, a, b);
                const NodeId l = h.lca(a, b);
                const auto path_l = ancestors_or_empty(h, l);
                const auto path_b = h.ancestors(b);
                const double common = path_sum(wh, path_l);
                const double two_sided = (path_sum(wh, path_a) - common) + (path_sum(wh, path_b) - common);
                const double from_lca = 1.0 - 2.0 * common;
                std::vector<NodeId> only_a, only_b;
                for (NodeId j : path_a) {
                    if (std::find(path_l.begin(), path_l.end(), j) == path_l.end()) only_a.push_back(j);
                }
                for (NodeId j : path_b) {
                    if (std::find(path_l.begin(), path_l.end(), j) == path_l.end()) only_b.push_back(j);
                }
                const double one_sided_a = 2.0 * path_sum(wh, only_a);
                const double one_sided_b = 2.0 * path_sum(wh, only_b);
                for (double form : {two_sided, from_lca, one_sided_a, one_sided_b,
                                    tree_distance(wh, a, b)}) {
                    worst = std::max(worst, std::abs(form - shortest));
                }
                ++pairs;
            }
        }
    }
    CheckResult r = make_result("tree-metric", worst, kMetricTol,
                                std::to_string(trees.size()) + " trees, " + std::to_string(pairs) +
                                    " leaf pairs, leaf-to-root off by " + sci(worst_root));
    r.passed = r.passed && worst_root <= kMetricTol;
    return r;
}

std::vector<CheckResult> run_verification(const Options& options) {
    const Scale scale = options.full_scale ? Scale::full() : Scale::quick();
    const Rng rng(options.seed);
    std::vector<CheckResult> results;
    results.push_back(check_balance(scale, rng.split("balance"), options.corrupt_weights));
    results.push_back(check_reference_weights());
    results.push_back(check_proper_scoring(scale, rng.split("proper-scoring")));
    results.push_back(check_hxe_equivalence(scale, rng.split("hxe")));
    results.push_back(check_flat_reduction(scale, rng.split("flat")));
    results.push_back(check_gradient(scale, rng.split("gradient")));
    results.push_back(check_wasserstein(scale, rng.split("wasserstein")));
    results.push_back(check_tree_metric(scale, rng.split("tree-metric")));
    if (options.include_naive) results.push_back(check_naive_counterexample());
    return results;
}

std::string format_check(const CheckResult& result) {
    return std::string(result.passed ? "PASS " : "FAIL ") + result.name + ": " + result.detail;
}

} // namespace hloss::verify
