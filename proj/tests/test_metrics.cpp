#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "hloss/errors.hpp"
#include "hloss/metrics.hpp"
#include "hloss/oracle.hpp"
#include "hloss/shapes.hpp"
#include "support.hpp"

using namespace hloss;
using doctest::Approx;

TEST_CASE("hierarchical distance is the height of the lowest common ancestor") {
    const Hierarchy h = seven_leaf_taxonomy();
    CHECK(hier_distance(h, 6, 7) == 1);
    CHECK(hier_distance(h, 1, 5) == 3);
    CHECK(hier_distance(h, 5, 6) == 2);
    for (NodeId k = 1; k <= 7; ++k) CHECK(hier_distance(h, k, k) == 0);
    CHECK_THROWS_AS(hier_distance(h, 9, 1), InputError);
}

TEST_CASE("argmax breaks ties toward the lowest class") {
    Eigen::VectorXd p(4);
    p << 0.3, 0.3, 0.1, 0.3;
    CHECK(argmax_class(p) == 1);
    p << 0.1, 0.2, 0.35, 0.35;
    CHECK(argmax_class(p) == 3);
}

TEST_CASE("tree Wasserstein to a point mass") {
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 1.0);
    CHECK(tree_wasserstein(wh, test::one_hot(7, 3), 3) == 0.0);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(7);
    f[5] = f[6] = 0.5;
    CHECK(tree_wasserstein(wh, f, 6) == Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK_THROWS_AS(tree_wasserstein(wh, Eigen::VectorXd::Constant(7, 0.2), 6), InputError);
}

TEST_CASE("general form agrees with the closed form and the transport oracle") {
    Rng rng(21);
    for (int t = 0; t < 10; ++t) {
        Hierarchy h = t == 0 ? seven_leaf_taxonomy() : random_hierarchy(rng, 14);
        while (h.leaf_count() > 8) h = random_hierarchy(rng, 14);
        const WeightedHierarchy wh = exponential_weights(h, rng.uniform(0.5, 2.0));
        const int K = h.leaf_count();
        for (int s = 0; s < 10; ++s) {
            const Eigen::VectorXd f = test::random_simplex(rng, K);
            const Eigen::VectorXd g = test::random_simplex(rng, K);
            const NodeId y = rng.uniform_int(1, K);
            const Eigen::VectorXd point = test::one_hot(K, y);
            const double closed = tree_wasserstein(wh, f, y);
            CHECK(std::abs(closed - tree_wasserstein_general(wh, lift_to_nodes(h, f),
                                                             lift_to_nodes(h, point))) < 1e-12);
            CHECK(std::abs(closed - oracle::ot_lp(wh, f, point)) < 1e-8);
            const double pair = tree_wasserstein_general(wh, lift_to_nodes(h, f), lift_to_nodes(h, g));
            CHECK(std::abs(pair - oracle::ot_lp(wh, f, g)) < 1e-8);
            CHECK(pair == Approx(tree_wasserstein_general(wh, lift_to_nodes(h, g),
                                                          lift_to_nodes(h, f))).epsilon(1e-14));
            CHECK(tree_wasserstein_general(wh, lift_to_nodes(h, f), lift_to_nodes(h, f)) == 0.0);
        }
    }
}

TEST_CASE("general form between point masses is the tree distance") {
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 1.2);
    const Hierarchy& h = wh.tree();
    for (NodeId a = 1; a <= 7; ++a) {
        for (NodeId b = 1; b <= 7; ++b) {
            const double w = tree_wasserstein_general(wh, lift_to_nodes(h, test::one_hot(7, a)),
                                                      lift_to_nodes(h, test::one_hot(7, b)));
            CHECK(std::abs(w - tree_distance(wh, a, b)) < 1e-12);
        }
    }
}

TEST_CASE("general form accepts mass on internal nodes") {
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 1.0);
    const int n = wh.tree().node_count();
    Eigen::VectorXd at9 = Eigen::VectorXd::Zero(n), at6 = Eigen::VectorXd::Zero(n);
    at9[9] = 1.0;
    at6[6] = 1.0;
    CHECK(tree_wasserstein_general(wh, at9, at6) == Approx(1.0 / 6.0).epsilon(1e-14));
    Eigen::VectorXd at_root = Eigen::VectorXd::Zero(n);
    at_root[kRoot] = 1.0;
    for (NodeId k = 1; k <= 7; ++k) {
        Eigen::VectorXd leaf = Eigen::VectorXd::Zero(n);
        leaf[k] = 1.0;
        CHECK(tree_wasserstein_general(wh, at_root, leaf) == Approx(0.5).epsilon(1e-14));
        CHECK(oracle::bfs_distance(wh, kRoot, k) == Approx(0.5).epsilon(1e-14));
    }
    CHECK_THROWS_AS(tree_wasserstein_general(wh, at9, Eigen::VectorXd::Zero(n)), InputError);
}

TEST_CASE("Wasserstein lower bound from the nearest other class") {
    Rng rng(22);
    for (int t = 0; t < 20; ++t) {
        const Hierarchy h = random_hierarchy(rng, 20);
        if (h.leaf_count() < 2) continue;
        const WeightedHierarchy wh = exponential_weights(h, 0.9);
        const Eigen::MatrixXd d = leaf_distance_matrix(wh);
        const Eigen::VectorXd f = test::random_simplex(rng, h.leaf_count());
        const NodeId y = rng.uniform_int(1, h.leaf_count());
        double nearest = 1.0;
        for (int k = 0; k < h.leaf_count(); ++k) {
            if (k != y - 1) nearest = std::min(nearest, d(y - 1, k));
        }
        const double w = tree_wasserstein(wh, f, y);
        CHECK(w >= (1.0 - f[y - 1]) * nearest - 1e-15);
        CHECK(w > 0.0);
        CHECK(w <= 1.0);
    }
}

TEST_CASE("evaluation report") {
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 1.0);
    SUBCASE("perfect predictions") {
        Eigen::MatrixXd preds(7, 7);
        std::vector<NodeId> labels;
        for (NodeId k = 1; k <= 7; ++k) {
            preds.row(k - 1) = test::one_hot(7, k).transpose();
            labels.push_back(k);
        }
        const EvaluationReport r = evaluate(wh, preds, labels);
        CHECK(r.accuracy == 1.0);
        CHECK(r.mean_hier_distance == 0.0);
        CHECK(r.mean_wasserstein == 0.0);
        CHECK(r.sample_count == 7);
    }
    SUBCASE("two samples") {
        Eigen::MatrixXd preds(2, 7);
        preds.row(0) = test::one_hot(7, 7).transpose();
        preds.row(1) = test::one_hot(7, 1).transpose();
        const std::vector<NodeId> labels{6, 1};
        const EvaluationReport r = evaluate(wh, preds, labels);
        CHECK(r.accuracy == 0.5);
        CHECK(r.mean_hier_distance == 0.5);
        CHECK(r.mean_wasserstein == Approx(1.0 / 6.0).epsilon(1e-14));
    }
    SUBCASE("errors") {
        Eigen::MatrixXd preds = Eigen::MatrixXd::Constant(2, 7, 1.0 / 7.0);
        CHECK_THROWS_AS(evaluate(wh, preds, std::vector<NodeId>{1}), InputError);
        CHECK_THROWS_AS(evaluate(wh, Eigen::MatrixXd(0, 7), std::vector<NodeId>{}), InputError);
        CHECK_THROWS_AS(evaluate(wh, Eigen::MatrixXd::Constant(1, 6, 1.0 / 6), std::vector<NodeId>{1}),
                        InputError);
    }
}

TEST_CASE("flat tree: hierarchical distance counts the errors") {
    Rng rng(23);
    const WeightedHierarchy wh = exponential_weights(flat_hierarchy(5), 1.0);
    const int n = 200;
    Eigen::MatrixXd preds(n, 5);
    std::vector<NodeId> labels;
    for (int i = 0; i < n; ++i) {
        preds.row(i) = test::random_simplex(rng, 5).transpose();
        labels.push_back(rng.uniform_int(1, 5));
    }
    const EvaluationReport r = evaluate(wh, preds, labels);
    CHECK(r.mean_hier_distance == Approx(1.0 - r.accuracy).epsilon(1e-14));
}

TEST_CASE("evaluation does not depend on sample order or thread count") {
    Rng rng(24);
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 0.9);
    const int n = 120;
    Eigen::MatrixXd preds(n, 7);
    std::vector<NodeId> labels;
    for (int i = 0; i < n; ++i) {
        preds.row(i) = test::random_simplex(rng, 7).transpose();
        labels.push_back(rng.uniform_int(1, 7));
    }
    const EvaluationReport base = evaluate(wh, preds, labels);
    const EvaluationReport threaded = evaluate(wh, preds, labels, 4);
    CHECK(threaded.accuracy == base.accuracy);
    CHECK(threaded.mean_wasserstein == base.mean_wasserstein);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Eigen::MatrixXd shuffled(n, 7);
    std::vector<NodeId> shuffled_labels(n);
    for (int i = 0; i < n; ++i) {
        shuffled.row(i) = preds.row(perm[i]);
        shuffled_labels[i] = labels[perm[i]];
    }
    const EvaluationReport other = evaluate(wh, shuffled, shuffled_labels);
    CHECK(other.accuracy == base.accuracy);
    CHECK(other.mean_hier_distance == base.mean_hier_distance);
    CHECK(std::abs(other.mean_wasserstein - base.mean_wasserstein) < 1e-12);
}

TEST_CASE("coarse decisions") {
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 1.0);
    const PrunedPartition p = prune(wh, 0.2);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(7);
    f[1] = f[2] = f[3] = 1.0 / 3.0;
    const int predicted = coarse_decision(p, f);
    CHECK(p.groups[predicted].node == 8);
    CHECK(predicted != p.group_of[6 - 1]);
    // Ties go to the group holding the lowest class.
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(7, 1.0 / 7.0);
    const PrunedPartition fine = prune(wh, 0.5);
    CHECK(coarse_decision(fine, u) == fine.group_of[0]);
}

TEST_CASE("coarsening curve") {
    Rng rng(25);
    for (int t = 0; t < 20; ++t) {
        const Hierarchy h = t == 0 ? seven_leaf_taxonomy() : random_hierarchy(rng, 30);
        const WeightedHierarchy wh = exponential_weights(h, rng.uniform(0.5, 2.0));
        const int K = h.leaf_count();
        const int n = 60;
        Eigen::MatrixXd preds(n, K);
        std::vector<NodeId> labels;
        for (int i = 0; i < n; ++i) {
            preds.row(i) = test::random_simplex(rng, K).transpose();
            labels.push_back(rng.uniform_int(1, K));
        }
        const CoarseningCurve curve = coarsening_curve(wh, preds, labels);
        REQUIRE(curve.points.size() >= 2);
        CHECK(curve.points.front().tau == 0.0);
        CHECK(curve.points.front().group_count == 1);
        CHECK(curve.points.front().accuracy == 1.0);
        CHECK(curve.points.back().tau == 0.5);
        CHECK(curve.points.back().group_count == K);
        CHECK(curve.points.back().accuracy == evaluate(wh, preds, labels).accuracy);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].tau > curve.points[i - 1].tau);
            CHECK(curve.points[i].group_count >= curve.points[i - 1].group_count);
        }
    }
}

TEST_CASE("coarsening curve on a custom grid") {
    const WeightedHierarchy wh = exponential_weights(seven_leaf_taxonomy(), 1.0);
    Eigen::MatrixXd preds(1, 7);
    preds.row(0) = Eigen::RowVectorXd::Zero(7);
    preds(0, 1) = preds(0, 2) = preds(0, 3) = 1.0 / 3.0;
    const std::vector<NodeId> labels{6};
    const CoarseningCurve curve = coarsening_curve(wh, preds, labels, std::vector<double>{0.2, 0.1});
    REQUIRE(curve.points.size() == 4);
    CHECK(curve.points[1].tau == 0.1);
    CHECK(curve.points[1].group_count == 3);
    CHECK(curve.points[2].tau == 0.2);
    CHECK(curve.points[2].group_count == 4);
    CHECK(curve.points[2].accuracy == 0.0);
    CHECK(curve.points[3].tau == 0.5);
    CHECK_THROWS_AS(coarsening_curve(wh, preds, labels, std::vector<double>{0.7}), InputError);
    CHECK_THROWS_AS(coarsening_curve(wh, preds, labels, std::vector<double>{0.0}), InputError);
}
