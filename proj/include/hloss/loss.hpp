#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hloss/errors.hpp"
#include "hloss/hierarchy.hpp"
#include "hloss/weighting.hpp"

namespace hloss {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Lower bound applied to aggregated probabilities before taking logs in the
/// probability-domain routines.
inline constexpr double kProbabilityFloor = 1e-300;

namespace detail {

template <typename Derived>
void check_logits(const Eigen::MatrixBase<Derived>& logits, const Hierarchy& h) {
    if (logits.size() != h.leaf_count()) {
        throw InputError("logit vector has " + std::to_string(logits.size()) +
                         " entries, tree has " + std::to_string(h.leaf_count()) + " classes");
    }
    if (!logits.allFinite()) throw InputError("logits must be finite");
}

template <typename Derived>
void check_simplex(const Eigen::MatrixBase<Derived>& p, Eigen::Index size, double tol,
                   const char* what) {
    using Scalar = typename Derived::Scalar;
    if (p.size() != size) {
        throw InputError(std::string(what) + " has " + std::to_string(p.size()) +
                         " entries, expected " + std::to_string(size));
    }
    if (!p.allFinite() || (p.array() < Scalar(-tol)).any() ||
        std::abs(p.sum() - Scalar(1)) > Scalar(tol)) {
        throw InputError(std::string(what) + " is not a probability vector");
    }
}

} // namespace detail

/// log sum_k exp(logits_k), shifted by the maximum.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& logits) {
    using std::exp;
    using std::log;
    const auto m = logits.maxCoeff();
    return m + log((logits.array() - m).exp().sum());
}

/// log-sum-exp restricted to the given classes (1-based class ids).
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& logits,
                                     std::span<const NodeId> classes) {
    using Scalar = typename Derived::Scalar;
    using std::exp;
    using std::log;
    if (classes.size() == 1) return logits(classes.front() - 1);
    Scalar m = -std::numeric_limits<Scalar>::infinity();
    for (NodeId k : classes) m = std::max(m, logits(k - 1));
    Scalar s(0);
    for (NodeId k : classes) s += exp(logits(k - 1) - m);
    return m + log(s);
}

/// -log of the softmax mass on the leaves under node j, given the full
/// log-sum-exp. When the group holds most of the mass the plain difference
/// of two log-sum-exps cancels badly, so the mass outside the group is
/// summed directly and passed through log1p.
template <typename Derived>
typename Derived::Scalar neg_log_group_mass(const Hierarchy& h,
                                            const Eigen::MatrixBase<Derived>& logits, NodeId j,
                                            typename Derived::Scalar total) {
    using Scalar = typename Derived::Scalar;
    using std::exp;
    using std::log1p;
    const auto order = h.leaf_order();
    const auto [first, last] = h.leaf_interval(j);
    const Scalar m = logits.maxCoeff();
    Scalar inside(0), outside(0);
    for (int i = 0; i < static_cast<int>(order.size()); ++i) {
        const Scalar e = exp(logits(order[i] - 1) - m);
        (i >= first && i < last ? inside : outside) += e;
    }
    if (inside >= outside) return log1p(outside / inside);
    return total - log_sum_exp(logits, h.leaves_under(j));
}

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    if (!logits.allFinite()) throw InputError("logits must be finite");
    const auto m = logits.maxCoeff();
    Vector<typename Derived::Scalar> e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

/// Leaf-membership of every node: the sparse, fixed 0/1 layer mapping class
/// probabilities to superclass probabilities.
class AggregationMap {
public:
    explicit AggregationMap(const Hierarchy& h);

    /// Classes subsumed by node j (1-based, ascending).
    std::span<const NodeId> members(NodeId j) const { return members_.at(j); }
    int node_count() const { return static_cast<int>(members_.size()); }

    /// node_count x K matrix with a one where class k belongs to node j.
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

    /// Probability mass of every node's class set.
    template <typename Derived>
    Vector<typename Derived::Scalar> aggregate(const Eigen::MatrixBase<Derived>& probs) const {
        return matrix_.cast<typename Derived::Scalar>() * probs;
    }

private:
    std::vector<std::vector<NodeId>> members_;
    Eigen::SparseMatrix<double> matrix_;
};

inline AggregationMap build_aggregation(const Hierarchy& h) { return AggregationMap(h); }

template <typename Scalar>
struct LossAndGradient {
    Scalar value;
    Vector<Scalar> gradient;
};

/// Weighted hierarchical loss
///   -sum_{j in a(y)} w_j log(sum_{k in v_j} f_k),
/// where every superclass log-probability is a group log-sum-exp minus the
/// global log-sum-exp.
template <typename Derived>
typename Derived::Scalar hierarchical_loss(const WeightedHierarchy& wh,
                                           const Eigen::MatrixBase<Derived>& logits, NodeId y) {
    using Scalar = typename Derived::Scalar;
    const Hierarchy& h = wh.tree();
    detail::check_logits(logits, h);
    h.check_leaf(y);
    const Scalar total = log_sum_exp(logits);
    Scalar loss(0);
    for (NodeId j : h.ancestors(y)) {
        loss += Scalar(wh.weight(j)) * neg_log_group_mass(h, logits, j, total);
    }
    return loss;
}

/// Loss and its exact gradient with respect to the logits:
///   dL/dz_m = f_m sum_{j in a(y)} w_j - sum_{j in a(y), m in v_j} w_j f_m / F_j.
template <typename Derived>
LossAndGradient<typename Derived::Scalar> hierarchical_loss_and_grad(
    const WeightedHierarchy& wh, const Eigen::MatrixBase<Derived>& logits, NodeId y) {
    using Scalar = typename Derived::Scalar;
    using std::exp;
    const Hierarchy& h = wh.tree();
    detail::check_logits(logits, h);
    h.check_leaf(y);
    const Scalar total = log_sum_exp(logits);
    Vector<Scalar> grad = Vector<Scalar>::Zero(logits.size());
    Scalar loss(0);
    Scalar path_weight(0);
    for (NodeId j : h.ancestors(y)) {
        const auto members = h.leaves_under(j);
        const Scalar group = log_sum_exp(logits, members);
        const Scalar w(wh.weight(j));
        loss += w * neg_log_group_mass(h, logits, j, total);
        path_weight += w;
        for (NodeId m : members) grad(m - 1) -= w * exp(logits(m - 1) - group);
    }
    grad += path_weight * (logits.array() - total).exp().matrix();
    return {loss, grad};
}

template <typename Derived>
Vector<typename Derived::Scalar> hierarchical_loss_grad(const WeightedHierarchy& wh,
                                                        const Eigen::MatrixBase<Derived>& logits,
                                                        NodeId y) {
    return hierarchical_loss_and_grad(wh, logits, y).gradient;
}

/// Unweighted variant (unit weight on every ancestor). Not a proper scoring
/// rule; kept for comparison.
template <typename Derived>
typename Derived::Scalar naive_loss(const Hierarchy& h, const Eigen::MatrixBase<Derived>& logits,
                                    NodeId y) {
    using Scalar = typename Derived::Scalar;
    detail::check_logits(logits, h);
    h.check_leaf(y);
    const Scalar total = log_sum_exp(logits);
    Scalar loss(0);
    for (NodeId j : h.ancestors(y)) loss += neg_log_group_mass(h, logits, j, total);
    return loss;
}

/// Hierarchical cross-entropy in its conditional form:
///   -sum_{j in a(y)} exp(-alpha d(j)) log(F_j / F_{p(j)}),  F_root = 1.
template <typename Derived>
typename Derived::Scalar hxe_loss(const Hierarchy& h, const Eigen::MatrixBase<Derived>& logits,
                                  NodeId y, double alpha) {
    using Scalar = typename Derived::Scalar;
    using std::exp;
    if (!std::isfinite(alpha) || alpha <= 0.0) throw InputError("hxe loss needs alpha > 0");
    detail::check_logits(logits, h);
    h.check_leaf(y);
    const Scalar total = log_sum_exp(logits);
    Scalar loss(0);
    for (NodeId j : h.ancestors(y)) {
        const NodeId p = h.parent(j);
        const Scalar log_parent = p == kRoot ? total : log_sum_exp(logits, h.leaves_under(p));
        const Scalar log_node = log_sum_exp(logits, h.leaves_under(j));
        loss -= Scalar(exp(-alpha * h.depth(j))) * (log_node - log_parent);
    }
    return loss;
}

/// Standard softmax cross-entropy, y in 1..K.
template <typename Derived>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& logits, NodeId y) {
    if (y < 1 || y > logits.size()) throw InputError("class id out of range");
    if (!logits.allFinite()) throw InputError("logits must be finite");
    return log_sum_exp(logits) - logits(y - 1);
}

template <typename Derived>
LossAndGradient<typename Derived::Scalar> cross_entropy_and_grad(
    const Eigen::MatrixBase<Derived>& logits, NodeId y) {
    using Scalar = typename Derived::Scalar;
    const Scalar value = cross_entropy(logits, y);
    Vector<Scalar> grad = softmax(logits);
    grad(y - 1) -= Scalar(1);
    return {value, grad};
}

/// Expected loss under the label distribution pi, summed over every non-root
/// node: -sum_j w_j pi(v_j) log f(v_j). Both arguments must lie on the simplex
/// (tolerance 1e-9). Works for any nonnegative weighting, balanced or not.
template <typename DerivedF, typename DerivedP>
typename DerivedF::Scalar expected_loss(const WeightedHierarchy& wh,
                                        const Eigen::MatrixBase<DerivedF>& f,
                                        const Eigen::MatrixBase<DerivedP>& pi) {
    using Scalar = typename DerivedF::Scalar;
    using std::log;
    const Hierarchy& h = wh.tree();
    detail::check_simplex(f, h.leaf_count(), 1e-9, "prediction");
    detail::check_simplex(pi, h.leaf_count(), 1e-9, "label distribution");
    Scalar value(0);
    for (NodeId j = 1; j < h.node_count(); ++j) {
        Scalar target(0), mass(0);
        for (NodeId k : h.leaves_under(j)) {
            target += Scalar(pi(k - 1));
            mass += f(k - 1);
        }
        if (target == Scalar(0) || wh.weight(j) == 0.0) continue;
        value -= Scalar(wh.weight(j)) * target * log(std::max(mass, Scalar(kProbabilityFloor)));
    }
    return value;
}

/// Gradient of expected_loss with respect to f (unconstrained coordinates):
///   d/df_k = -sum_{j in a(k)} w_j pi(v_j) / f(v_j).
template <typename DerivedF, typename DerivedP>
Vector<typename DerivedF::Scalar> expected_loss_gradient(const WeightedHierarchy& wh,
                                                         const Eigen::MatrixBase<DerivedF>& f,
                                                         const Eigen::MatrixBase<DerivedP>& pi) {
    using Scalar = typename DerivedF::Scalar;
    const Hierarchy& h = wh.tree();
    detail::check_simplex(f, h.leaf_count(), 1e-9, "prediction");
    detail::check_simplex(pi, h.leaf_count(), 1e-9, "label distribution");
    Vector<Scalar> grad = Vector<Scalar>::Zero(h.leaf_count());
    for (NodeId j = 1; j < h.node_count(); ++j) {
        Scalar target(0), mass(0);
        for (NodeId k : h.leaves_under(j)) {
            target += Scalar(pi(k - 1));
            mass += f(k - 1);
        }
        const Scalar term = Scalar(wh.weight(j)) * target / std::max(mass, Scalar(kProbabilityFloor));
        for (NodeId k : h.leaves_under(j)) grad(k - 1) -= term;
    }
    return grad;
}

} // namespace hloss
