#include "hloss/metrics.hpp"

#include <algorithm>

#include "hloss/parallel.hpp"

namespace hloss {

namespace {

void check_samples(const WeightedHierarchy& wh, const Eigen::MatrixXd& predictions,
                   std::span<const NodeId> labels) {
    if (labels.empty()) throw InputError("evaluation needs at least one sample");
    if (static_cast<std::size_t>(predictions.rows()) != labels.size()) {
        throw InputError("predictions and labels differ in length");
    }
    if (predictions.cols() != wh.tree().leaf_count()) {
        throw InputError("prediction width does not match the class count");
    }
    for (NodeId y : labels) wh.tree().check_leaf(y);
}

} // namespace

int hier_distance(const Hierarchy& h, NodeId y, NodeId y_hat) {
    h.check_leaf(y);
    h.check_leaf(y_hat);
    return h.height(h.lca(y, y_hat));
}

EvaluationReport evaluate(const WeightedHierarchy& wh, const Eigen::MatrixXd& predictions,
                          std::span<const NodeId> labels, int threads) {
    check_samples(wh, predictions, labels);
    const int n = static_cast<int>(labels.size());
    std::vector<int> correct(n), height(n);
    std::vector<double> transport(n);
    parallel_for(n, threads, [&](int i) {
        const auto row = predictions.row(i).transpose();
        const NodeId decision = argmax_class(row);
        correct[i] = decision == labels[i];
        height[i] = hier_distance(wh.tree(), labels[i], decision);
        transport[i] = tree_wasserstein(wh, row, labels[i]);
    });
    EvaluationReport report;
    report.sample_count = n;
    long hits = 0, heights = 0;
    double transport_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        hits += correct[i];
        heights += height[i];
        transport_sum += transport[i];
    }
    report.accuracy = static_cast<double>(hits) / n;
    report.mean_hier_distance = static_cast<double>(heights) / n;
    report.mean_wasserstein = transport_sum / n;
    return report;
}

CoarseningCurve coarsening_curve(const WeightedHierarchy& wh, const Eigen::MatrixXd& predictions,
                                 std::span<const NodeId> labels,
                                 std::optional<std::vector<double>> grid) {
    check_samples(wh, predictions, labels);
    std::vector<double> taus = grid ? std::move(*grid) : tau_grid(wh);
    for (double t : taus) {
        if (!(t > 0.0 && t <= 0.5)) throw InputError("curve thresholds must lie in (0, 1/2]");
    }
    taus.push_back(0.5);
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

    const int n = static_cast<int>(labels.size());
    CoarseningCurve curve;
    curve.points.push_back({0.0, 1, 1.0});
    for (double tau : taus) {
        const PrunedPartition partition = prune(wh, tau);
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            const int predicted = coarse_decision(partition, predictions.row(i).transpose());
            hits += predicted == partition.group_of[labels[i] - 1];
        }
        curve.points.push_back(
            {tau, static_cast<int>(partition.groups.size()), static_cast<double>(hits) / n});
    }
    return curve;
}

} // namespace hloss
