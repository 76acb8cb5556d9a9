#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hloss/hierarchy.hpp"
#include "hloss/weighting.hpp"

namespace hloss {

enum class LossKind { CrossEntropy, Hierarchical, Hxe };

std::string to_string(LossKind kind);
/// Accepts "ce", "hier" and "hxe".
LossKind parse_loss_kind(const std::string& text);

/// A per-sample training loss over logits, bound to its hierarchy.
///
/// Hierarchical uses exponential weights with parameter q; Hxe uses the
/// un-normalized HXE weights (so the value equals the conditional form
/// exactly); CrossEntropy ignores the tree apart from its class count.
class Objective {
public:
    static Objective cross_entropy(const Hierarchy& h);
    static Objective hierarchical(const Hierarchy& h, double q);
    static Objective hxe(const Hierarchy& h, double alpha);
    static Objective weighted(WeightedHierarchy wh);

    LossKind kind() const { return kind_; }
    int class_count() const { return class_count_; }
    const std::optional<WeightedHierarchy>& weighting() const { return weighting_; }

    double value(const Eigen::Ref<const Eigen::VectorXd>& logits, NodeId y) const;
    /// Writes dL/dlogits into `grad` and returns the loss.
    double value_and_grad(const Eigen::Ref<const Eigen::VectorXd>& logits, NodeId y,
                          Eigen::Ref<Eigen::VectorXd> grad) const;

private:
    Objective(LossKind kind, int class_count, std::optional<WeightedHierarchy> wh)
        : kind_(kind), class_count_(class_count), weighting_(std::move(wh)) {}

    LossKind kind_;
    int class_count_;
    std::optional<WeightedHierarchy> weighting_;
};

struct BatchLoss {
    /// Per-sample losses in input order.
    Eigen::VectorXd per_sample;
    /// Uniform average of per_sample, summed in index order.
    double mean = 0.0;
    /// Mean gradient w.r.t. the logits (rows follow the input), if requested.
    Eigen::MatrixXd gradient;
};

/// Evaluates the objective on every row of `logits` (N x K). Samples may be
/// spread over `threads` workers; the reduction runs in sample order so the
/// result is bitwise identical for any thread count.
BatchLoss evaluate_batch(const Objective& objective, const Eigen::MatrixXd& logits,
                         std::span<const NodeId> labels, bool with_gradient, int threads = 1);

} // namespace hloss
