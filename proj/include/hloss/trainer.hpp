#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hloss/hierarchy.hpp"
#include "hloss/metrics.hpp"
#include "hloss/objective.hpp"
#include "hloss/random.hpp"

namespace hloss {

/// Feature rows with one class label (1..K) each.
struct Dataset {
    Eigen::MatrixXd features;  // N x m
    std::vector<NodeId> labels;

    int size() const { return static_cast<int>(labels.size()); }
    int dim() const { return static_cast<int>(features.cols()); }
    /// counts[k - 1] = number of samples of class k.
    std::vector<int> class_counts(int classes) const;
    /// Throws InputError unless labels are in 1..classes and features finite.
    void validate(int classes) const;
};

/// Linear softmax classifier: logits = W x + b.
struct LinearModel {
    Eigen::MatrixXd weights;  // K x m
    Eigen::VectorXd biases;   // K

    int classes() const { return static_cast<int>(weights.rows()); }
    int dim() const { return static_cast<int>(weights.cols()); }
    /// N x K logits for the rows of `features`.
    Eigen::MatrixXd logits(const Eigen::MatrixXd& features) const;
    /// N x K softmax outputs.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const;
};

struct TrainConfig {
    LossKind loss = LossKind::Hierarchical;
    double q = 0.9;
    double alpha = 0.1;
    int epochs = 100;
    double learning_rate = 0.1;
    int batch_size = 16;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TrainResult {
    LinearModel model;
    /// Mean training loss over the whole dataset after each epoch.
    std::vector<double> epoch_losses;
};

Objective make_objective(const Hierarchy& h, const TrainConfig& config);

/// Class centers from a root-to-leaf Gaussian walk: each node moves away from
/// its parent's center by a step whose scale is the node's share of the
/// path weight (exponential weights at q = 1), so nearby classes in the tree
/// get nearby centers. Returns K x dim.
Eigen::MatrixXd synthetic_class_means(const Hierarchy& h, int dim, Rng rng);

/// `per_class` Gaussian samples (std `spread`) around each center, grouped by
/// class in ascending order.
Dataset sample_around_means(const Eigen::MatrixXd& means, int per_class, double spread, Rng rng);

/// Hierarchy-respecting synthetic data; deterministic in `seed`.
Dataset generate_synthetic(const Hierarchy& h, int per_class, int dim, double spread,
                           std::uint64_t seed);

/// Holds out the last `fraction` of each class's samples (in dataset order).
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double fraction = 0.2);

/// Mini-batch gradient descent with a cosine-annealed step size, zero biases
/// and N(0, 0.01^2) initial weights. Throws NumericalError on a non-finite loss.
TrainResult train(const Dataset& data, const Hierarchy& h, const TrainConfig& config);

struct ModelEvaluation {
    EvaluationReport report;
    CoarseningCurve curve;
};

ModelEvaluation evaluate_model(const LinearModel& model, const Dataset& data,
                               const WeightedHierarchy& wh, int threads = 1);

} // namespace hloss
