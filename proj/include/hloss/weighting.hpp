#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hloss/hierarchy.hpp"

namespace hloss {

/// Hierarchy plus one nonnegative weight per node (the weight of the node's
/// incoming edge), with w_0 = 0 at the root.
///
/// A weighting is balanced when every leaf-to-root path carries the same
/// total weight, `balance_constant()`. The constructor only checks the
/// structural invariants; use validate_balanced() for the path condition.
class WeightedHierarchy {
public:
    WeightedHierarchy(Hierarchy tree, Eigen::VectorXd weights, double balance_constant = 0.5);

    const Hierarchy& tree() const { return tree_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    double weight(NodeId j) const;
    double balance_constant() const { return balance_constant_; }

    /// Sum of weights over the ancestor set of j (j included, root excluded);
    /// zero for the root.
    double cumulative(NodeId j) const;
    const Eigen::VectorXd& cumulative_weights() const { return cumulative_; }

    bool is_balanced(double tol = 1e-9) const;

private:
    Hierarchy tree_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd cumulative_;
    double balance_constant_;
};

/// Growth factor (1 - q) / (1 - q^(h+1)) of the exponential scheme, with its
/// limit 1 / (h + 1) at q = 1. Evaluated without overflow for large q and
/// without cancellation near q = 1.
double exponential_share(double q, int height);

/// Exponential weighting: top-down, each node takes the share
/// exponential_share(q, h(j)) of what remains of the 1/2 budget below its
/// parent. q < 1 favors coarse superclasses, q > 1 favors fine classes.
/// Throws InputError for q < 0 or non-finite q.
WeightedHierarchy exponential_weights(const Hierarchy& h, double q);

/// Weights that turn the hierarchical cross-entropy into the weighted form:
/// exp(-alpha d) for leaves and exp(-alpha d) - exp(-alpha (d + 1)) for
/// internal nodes, balanced to exp(-alpha). With `renormalize` the weights are
/// rescaled so the constant is 1/2.
WeightedHierarchy hxe_weights(const Hierarchy& h, double alpha, bool renormalize = true);

/// Leaves whose ancestor-weight sum deviates from the balance constant by
/// more than tol, ascending. Empty iff the weighting is balanced.
std::vector<NodeId> validate_balanced(const WeightedHierarchy& wh, double tol);

/// Tree metric between two leaves, 2 (C - cumulative(lca(y, y_hat))); with
/// C = 1/2 this is 1 - 2 * (ancestor weight of the lowest common ancestor).
double tree_distance(const WeightedHierarchy& wh, NodeId y, NodeId y_hat);

/// Pairwise tree_distance between leaves, as a K x K matrix (0-based).
Eigen::MatrixXd leaf_distance_matrix(const WeightedHierarchy& wh);

/// Weight dump: header, then one tab-separated row per node with columns
/// node_id, original_id, parent, height, depth, weight, cumulative.
std::string format_weight_dump(const WeightedHierarchy& wh, bool full_precision = false);

} // namespace hloss
