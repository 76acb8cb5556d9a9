#include <cmath>
#include <vector>

#include "doctest.h"
#include "hloss/errors.hpp"
#include "hloss/shapes.hpp"
#include "hloss/trainer.hpp"
#include "support.hpp"

using namespace hloss;
using doctest::Approx;

TEST_CASE("synthetic data bookkeeping") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 10, 4, 1.0, 42);
    CHECK(data.size() == 70);
    CHECK(data.dim() == 4);
    CHECK(data.class_counts(7) == std::vector<int>(7, 10));
    const Dataset again = generate_synthetic(h, 10, 4, 1.0, 42);
    CHECK(again.features == data.features);
    CHECK(again.labels == data.labels);
    const Dataset other = generate_synthetic(h, 10, 4, 1.0, 43);
    CHECK(other.features != data.features);
    CHECK_THROWS_AS(generate_synthetic(h, 0, 4, 1.0, 1), InputError);
    CHECK_THROWS_AS(generate_synthetic(h, 5, 1, 1.0, 1), InputError);
    CHECK_THROWS_AS(generate_synthetic(h, 5, 4, -1.0, 1), InputError);
}

TEST_CASE("class means follow the tree") {
    // Siblings deep in the tree share most of their walk, so they sit closer
    // together than classes that split at the root (on average over draws).
    const Hierarchy h = seven_leaf_taxonomy();
    double siblings = 0.0, strangers = 0.0;
    for (int s = 0; s < 200; ++s) {
        const Eigen::MatrixXd m = synthetic_class_means(h, 8, Rng(s));
        siblings += (m.row(5) - m.row(6)).norm();
        strangers += (m.row(0) - m.row(5)).norm();
    }
    CHECK(siblings < strangers);
}

TEST_CASE("zero spread puts every sample on its class mean") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 3, 5, 0.0, 9);
    for (int i = 0; i < data.size(); ++i) {
        const int first = (data.labels[i] - 1) * 3;
        CHECK(data.features.row(i) == data.features.row(first));
    }
    TrainConfig config;
    config.loss = LossKind::CrossEntropy;
    config.epochs = 200;
    config.learning_rate = 0.5;
    config.batch_size = 7;
    const TrainResult result = train(data, h, config);
    const ModelEvaluation eval = evaluate_model(result.model, data, exponential_weights(h, 1.0));
    CHECK(eval.report.accuracy == 1.0);
    CHECK(eval.report.mean_hier_distance == 0.0);
}

TEST_CASE("holdout keeps the last fifth of every class") {
    const Dataset data = generate_synthetic(seven_leaf_taxonomy(), 10, 3, 1.0, 1);
    const auto [fit, held] = split_holdout(data);
    CHECK(fit.size() == 56);
    CHECK(held.size() == 14);
    CHECK(held.class_counts(7) == std::vector<int>(7, 2));
    CHECK(held.features.row(0) == data.features.row(8));
    CHECK(held.features.row(1) == data.features.row(9));
    CHECK_THROWS_AS(split_holdout(data, 1.0), InputError);
}

TEST_CASE("separable two-class problem reaches full training accuracy") {
    const Hierarchy h = flat_hierarchy(2);
    Dataset data;
    data.features.resize(40, 2);
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        const int y = i < 20 ? 1 : 2;
        const double side = y == 1 ? -1.0 : 1.0;
        data.features(i, 0) = side * (1.0 + rng.uniform());
        data.features(i, 1) = rng.normal();
        data.labels.push_back(y);
    }
    TrainConfig config;
    config.loss = LossKind::CrossEntropy;
    config.epochs = 200;
    config.learning_rate = 0.5;
    const TrainResult result = train(data, h, config);
    const ModelEvaluation eval = evaluate_model(result.model, data, exponential_weights(h, 1.0));
    CHECK(eval.report.accuracy == 1.0);
}

TEST_CASE("training is deterministic and does not diverge") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 8, 6, 1.0, 2);
    for (LossKind kind : {LossKind::CrossEntropy, LossKind::Hierarchical, LossKind::Hxe}) {
        TrainConfig config;
        config.loss = kind;
        config.epochs = 30;
        config.seed = 17;
        const TrainResult a = train(data, h, config);
        config.threads = 4;
        const TrainResult b = train(data, h, config);
        CHECK(a.model.weights == b.model.weights);
        CHECK(a.model.biases == b.model.biases);
        CHECK(a.epoch_losses == b.epoch_losses);
        CHECK(a.epoch_losses.size() == 30);
        CHECK(a.epoch_losses.back() <= a.epoch_losses.front());
        CHECK(a.model.weights.allFinite());
    }
}

TEST_CASE("a small step on the hierarchical loss decreases the batch loss") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Objective objective = Objective::hierarchical(h, 0.9);
    Rng rng(6);
    for (int probe = 0; probe < 3; ++probe) {
        const int n = 10;
        Eigen::MatrixXd x(n, 4);
        std::vector<NodeId> y;
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < 4; ++d) x(i, d) = rng.normal();
            y.push_back(rng.uniform_int(1, 7));
        }
        LinearModel model;
        model.weights = Eigen::MatrixXd::Random(7, 4);
        model.biases = Eigen::VectorXd::Random(7);
        const BatchLoss before = evaluate_batch(objective, model.logits(x), y, true);
        LinearModel stepped = model;
        const double rate = 1e-3;
        stepped.weights -= rate * before.gradient.transpose() * x;
        stepped.biases -= rate * before.gradient.colwise().sum().transpose();
        const BatchLoss after = evaluate_batch(objective, stepped.logits(x), y, false);
        CHECK(after.mean < before.mean);
    }
}

TEST_CASE("flat tree: hierarchical training at twice the rate tracks cross-entropy") {
    const Hierarchy h = flat_hierarchy(4);
    const Dataset data = generate_synthetic(h, 12, 5, 1.0, 3);
    TrainConfig config;
    config.epochs = 10;
    config.batch_size = 8;
    config.seed = 4;
    config.loss = LossKind::CrossEntropy;
    config.learning_rate = 0.1;
    const TrainResult ce = train(data, h, config);
    config.loss = LossKind::Hierarchical;
    config.learning_rate = 0.2;
    const TrainResult hier = train(data, h, config);
    CHECK((ce.model.weights - hier.model.weights).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ce.model.biases - hier.model.biases).cwiseAbs().maxCoeff() < 1e-8);
    for (std::size_t e = 0; e < ce.epoch_losses.size(); ++e) {
        CHECK(hier.epoch_losses[e] == Approx(0.5 * ce.epoch_losses[e]).epsilon(1e-8));
    }
}

TEST_CASE("very large q matches half the cross-entropy on the seven-leaf taxonomy") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 6, 4, 1.0, 8);
    TrainConfig config;
    config.epochs = 20;
    config.seed = 2;
    config.loss = LossKind::CrossEntropy;
    config.learning_rate = 0.1;
    const TrainResult ce = train(data, h, config);
    config.loss = LossKind::Hierarchical;
    config.q = 1e6;
    config.learning_rate = 0.2;
    const TrainResult hier = train(data, h, config);
    CHECK(std::abs(hier.epoch_losses.back() - 0.5 * ce.epoch_losses.back()) < 1e-3 * 0.5);
}

TEST_CASE("zero model predicts uniformly") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 5, 3, 1.0, 4);
    LinearModel zero;
    zero.weights = Eigen::MatrixXd::Zero(7, 3);
    zero.biases = Eigen::VectorXd::Zero(7);
    const ModelEvaluation eval = evaluate_model(zero, data, exponential_weights(h, 1.0));
    // Every row ties, so the lowest class wins: exactly one class in seven is right.
    CHECK(eval.report.accuracy == Approx(1.0 / 7.0));
}

TEST_CASE("trainer input errors") {
    const Hierarchy h = seven_leaf_taxonomy();
    Dataset data = generate_synthetic(h, 2, 3, 1.0, 1);
    TrainConfig config;
    config.epochs = 0;
    CHECK_THROWS_AS(train(data, h, config), InputError);
    config.epochs = 1;
    config.learning_rate = 0.0;
    CHECK_THROWS_AS(train(data, h, config), InputError);
    config.learning_rate = 0.1;
    data.labels[0] = 9;
    CHECK_THROWS_AS(train(data, h, config), InputError);
    data.labels[0] = 1;
    data.features(0, 0) = std::nan("");
    CHECK_THROWS_AS(train(data, h, config), InputError);

    LinearModel model;
    model.weights = Eigen::MatrixXd::Zero(7, 2);
    model.biases = Eigen::VectorXd::Zero(7);
    const Dataset good = generate_synthetic(h, 2, 3, 1.0, 1);
    CHECK_THROWS_AS(evaluate_model(model, good, exponential_weights(h, 1.0)), InputError);
}

TEST_CASE("divergent training is reported") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 4, 3, 1e150, 1);
    TrainConfig config;
    config.epochs = 5;
    config.learning_rate = 1e200;
    CHECK_THROWS_AS(train(data, h, config), NumericalError);
}
