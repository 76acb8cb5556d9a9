#include "hloss/weighting.hpp"

#include <cmath>
#include <sstream>

#include "hloss/errors.hpp"
#include "hloss/format.hpp"

namespace hloss {

WeightedHierarchy::WeightedHierarchy(Hierarchy tree, Eigen::VectorXd weights,
                                     double balance_constant)
    : tree_(std::move(tree)), weights_(std::move(weights)), balance_constant_(balance_constant) {
    if (weights_.size() != tree_.node_count()) {
        throw InputError("weight vector has " + std::to_string(weights_.size()) +
                         " entries for a tree with " + std::to_string(tree_.node_count()) +
                         " nodes");
    }
    if (weights_[kRoot] != 0.0) {
        throw InputError("the root weight must be zero");
    }
    if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
        throw InputError("node weights must be finite and nonnegative");
    }
    if (!std::isfinite(balance_constant_) || balance_constant_ <= 0.0) {
        throw InputError("balance constant must be positive");
    }
    cumulative_ = Eigen::VectorXd::Zero(weights_.size());
    for (NodeId j : tree_.top_down_order()) {
        if (j != kRoot) cumulative_[j] = cumulative_[tree_.parent(j)] + weights_[j];
    }
}

double WeightedHierarchy::weight(NodeId j) const {
    tree_.check_node(j);
    return weights_[j];
}

double WeightedHierarchy::cumulative(NodeId j) const {
    tree_.check_node(j);
    return cumulative_[j];
}

bool WeightedHierarchy::is_balanced(double tol) const {
    return validate_balanced(*this, tol).empty();
}

double exponential_share(double q, int height) {
    const int n = height + 1;
    if (q == 1.0) return 1.0 / n;
    if (q == 0.0) return 1.0;
    if (q < 1.0) {
        const double lq = std::log(q);
        return std::expm1(lq) / std::expm1(n * lq);
    }
    // Divide through by q^n so nothing overflows as q grows.
    const double lr = -std::log(q);
    return std::exp(height * lr) * std::expm1(lr) / std::expm1(n * lr);
}

WeightedHierarchy exponential_weights(const Hierarchy& h, double q) {
    if (!std::isfinite(q) || q < 0.0) {
        throw InputError("exponential weighting needs a finite q >= 0");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(h.node_count());
    // remaining[j] = 1/2 - sum of weights on a(j)
    Eigen::VectorXd remaining = Eigen::VectorXd::Zero(h.node_count());
    remaining[kRoot] = 0.5;
    for (NodeId j : h.top_down_order()) {
        if (j == kRoot) continue;
        const double budget = remaining[h.parent(j)];
        if (h.is_leaf(j)) {
            w[j] = budget;
            continue;
        }
        w[j] = budget * exponential_share(q, h.height(j));
        remaining[j] = budget - w[j];
    }
    return WeightedHierarchy(h, std::move(w), 0.5);
}

WeightedHierarchy hxe_weights(const Hierarchy& h, double alpha, bool renormalize) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw InputError("hxe weighting needs alpha > 0");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(h.node_count());
    for (NodeId j = 1; j < h.node_count(); ++j) {
        const double d = h.depth(j);
        w[j] = h.is_leaf(j) ? std::exp(-alpha * d)
                            : std::exp(-alpha * d) - std::exp(-alpha * (d + 1.0));
    }
    const double constant = std::exp(-alpha);
    if (!renormalize) return WeightedHierarchy(h, std::move(w), constant);
    w /= 2.0 * constant;
    return WeightedHierarchy(h, std::move(w), 0.5);
}

std::vector<NodeId> validate_balanced(const WeightedHierarchy& wh, double tol) {
    std::vector<NodeId> violations;
    const Hierarchy& h = wh.tree();
    for (NodeId k = 1; k <= h.leaf_count(); ++k) {
        if (!(std::abs(wh.cumulative(k) - wh.balance_constant()) <= tol)) {
            violations.push_back(k);
        }
    }
    return violations;
}

double tree_distance(const WeightedHierarchy& wh, NodeId y, NodeId y_hat) {
    const Hierarchy& h = wh.tree();
    h.check_leaf(y);
    h.check_leaf(y_hat);
    if (y == y_hat) return 0.0;
    const double d = 2.0 * (wh.balance_constant() - wh.cumulative(h.lca(y, y_hat)));
    return d > 0.0 ? d : 0.0;
}

Eigen::MatrixXd leaf_distance_matrix(const WeightedHierarchy& wh) {
    const int K = wh.tree().leaf_count();
    Eigen::MatrixXd d(K, K);
    for (int a = 0; a < K; ++a) {
        for (int b = 0; b < K; ++b) d(a, b) = tree_distance(wh, a + 1, b + 1);
    }
    return d;
}

std::string format_weight_dump(const WeightedHierarchy& wh, bool full_precision) {
    const Hierarchy& h = wh.tree();
    std::ostringstream out;
    out << "node_id\toriginal_id\tparent\theight\tdepth\tweight\tcumulative\n";
    for (NodeId j = 0; j < h.node_count(); ++j) {
        out << j << '\t' << h.original_id(j) << '\t';
        if (j == kRoot) {
            out << '-';
        } else {
            out << h.parent(j);
        }
        out << '\t' << h.height(j) << '\t' << h.depth(j) << '\t'
            << format_number(wh.weight(j), full_precision) << '\t'
            << format_number(wh.cumulative(j), full_precision) << '\n';
    }
    return out.str();
}

} // namespace hloss
