#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hloss/loss.hpp"
#include "hloss/pruning.hpp"
#include "hloss/weighting.hpp"

namespace hloss {

/// Height of the lowest common ancestor of two classes; 0 iff they coincide.
int hier_distance(const Hierarchy& h, NodeId y, NodeId y_hat);

/// Index (1-based class id) of the largest entry; ties go to the lowest id.
template <typename Derived>
NodeId argmax_class(const Eigen::MatrixBase<Derived>& scores) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.size(); ++k) {
        if (scores(k) > scores(best)) best = k;
    }
    return static_cast<NodeId>(best) + 1;
}

/// Optimal-transport cost from the prediction f to the point mass on y under
/// the tree metric, which reduces to sum_k f_k d_T(y, k).
template <typename Derived>
typename Derived::Scalar tree_wasserstein(const WeightedHierarchy& wh,
                                          const Eigen::MatrixBase<Derived>& f, NodeId y) {
    using Scalar = typename Derived::Scalar;
    const Hierarchy& h = wh.tree();
    detail::check_simplex(f, h.leaf_count(), 1e-9, "prediction");
    h.check_leaf(y);
    Scalar w(0);
    for (NodeId k = 1; k <= h.leaf_count(); ++k) {
        if (k != y) w += f(k - 1) * Scalar(tree_distance(wh, y, k));
    }
    return w;
}

/// Embeds a distribution over classes into a distribution over all nodes.
template <typename Derived>
Vector<typename Derived::Scalar> lift_to_nodes(const Hierarchy& h,
                                               const Eigen::MatrixBase<Derived>& leaf_probs) {
    Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(h.node_count());
    out.segment(1, h.leaf_count()) = leaf_probs;
    return out;
}

/// Tree-Wasserstein distance between two distributions over nodes (any node
/// may carry mass): sum_j w_j |mu(subtree j) - nu(subtree j)|.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar tree_wasserstein_general(const WeightedHierarchy& wh,
                                                   const Eigen::MatrixBase<DerivedA>& mu,
                                                   const Eigen::MatrixBase<DerivedB>& nu) {
    using Scalar = typename DerivedA::Scalar;
    using std::abs;
    const Hierarchy& h = wh.tree();
    detail::check_simplex(mu, h.node_count(), 1e-9, "first distribution");
    detail::check_simplex(nu, h.node_count(), 1e-9, "second distribution");
    // Subtree masses of mu - nu, accumulated children-first.
    Vector<Scalar> diff = mu - nu.template cast<Scalar>();
    const auto order = h.top_down_order();
    Scalar w(0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId j = *it;
        if (j == kRoot) break;
        w += Scalar(wh.weight(j)) * abs(diff(j));
        diff(h.parent(j)) += diff(j);
    }
    return w;
}

struct EvaluationReport {
    double accuracy = 0.0;
    double mean_hier_distance = 0.0;
    double mean_wasserstein = 0.0;
    int sample_count = 0;
};

/// Accuracy (argmax, lowest index on ties), mean LCA-height distance and mean
/// tree-Wasserstein distance of predicted distributions (rows of
/// `predictions`). Per-sample terms are summed in sample order.
EvaluationReport evaluate(const WeightedHierarchy& wh, const Eigen::MatrixXd& predictions,
                          std::span<const NodeId> labels, int threads = 1);

struct CurvePoint {
    double tau;
    int group_count;
    double accuracy;
};

/// Accuracy of superclass-aggregated decisions as the tree is coarsened.
struct CoarseningCurve {
    /// Ascending in tau; the first point is the single-root endpoint
    /// (0, 1, 1.0) and the last is tau = 1/2.
    std::vector<CurvePoint> points;
};

/// Decision at the coarsened level: the group with the largest summed
/// probability, ties to the group holding the lowest class id.
template <typename Derived>
int coarse_decision(const PrunedPartition& partition, const Eigen::MatrixBase<Derived>& probs) {
    int best = 0;
    typename Derived::Scalar best_mass(-1);
    for (std::size_t g = 0; g < partition.groups.size(); ++g) {
        typename Derived::Scalar mass(0);
        for (NodeId k : partition.groups[g].leaves) mass += probs(k - 1);
        if (mass > best_mass) {
            best_mass = mass;
            best = static_cast<int>(g);
        }
    }
    return best;
}

/// Builds the curve over `grid` (default: tau_grid(wh)). 1/2 is always
/// included and the tau -> 0 endpoint is prepended.
CoarseningCurve coarsening_curve(const WeightedHierarchy& wh, const Eigen::MatrixXd& predictions,
                                 std::span<const NodeId> labels,
                                 std::optional<std::vector<double>> grid = std::nullopt);

} // namespace hloss
