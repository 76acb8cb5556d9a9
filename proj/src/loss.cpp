#include "hloss/loss.hpp"

#include <algorithm>

#include "hloss/objective.hpp"
#include "hloss/parallel.hpp"

namespace hloss {

AggregationMap::AggregationMap(const Hierarchy& h) : members_(h.node_count()) {
    std::vector<Eigen::Triplet<double>> entries;
    for (NodeId j = 0; j < h.node_count(); ++j) {
        const auto leaves = h.leaves_under(j);
        members_[j].assign(leaves.begin(), leaves.end());
        std::sort(members_[j].begin(), members_[j].end());
        for (NodeId k : leaves) entries.emplace_back(j, k - 1, 1.0);
    }
    matrix_.resize(h.node_count(), h.leaf_count());
    matrix_.setFromTriplets(entries.begin(), entries.end());
}

std::string to_string(LossKind kind) {
    switch (kind) {
    case LossKind::CrossEntropy: return "ce";
    case LossKind::Hierarchical: return "hier";
    case LossKind::Hxe: return "hxe";
    }
    return "?";
}

LossKind parse_loss_kind(const std::string& text) {
    if (text == "ce") return LossKind::CrossEntropy;
    if (text == "hier") return LossKind::Hierarchical;
    if (text == "hxe") return LossKind::Hxe;
    throw InputError("unknown loss '" + text + "' (expected ce, hier or hxe)");
}

Objective Objective::cross_entropy(const Hierarchy& h) {
    return Objective(LossKind::CrossEntropy, h.leaf_count(), std::nullopt);
}

Objective Objective::hierarchical(const Hierarchy& h, double q) {
    return Objective(LossKind::Hierarchical, h.leaf_count(), exponential_weights(h, q));
}

Objective Objective::hxe(const Hierarchy& h, double alpha) {
    return Objective(LossKind::Hxe, h.leaf_count(), hxe_weights(h, alpha, false));
}

Objective Objective::weighted(WeightedHierarchy wh) {
    const int k = wh.tree().leaf_count();
    return Objective(LossKind::Hierarchical, k, std::move(wh));
}

double Objective::value(const Eigen::Ref<const Eigen::VectorXd>& logits, NodeId y) const {
    if (!weighting_) return hloss::cross_entropy(logits, y);
    return hierarchical_loss(*weighting_, logits, y);
}

double Objective::value_and_grad(const Eigen::Ref<const Eigen::VectorXd>& logits, NodeId y,
                                 Eigen::Ref<Eigen::VectorXd> grad) const {
    if (!weighting_) {
        auto r = cross_entropy_and_grad(logits, y);
        grad = r.gradient;
        return r.value;
    }
    auto r = hierarchical_loss_and_grad(*weighting_, logits, y);
    grad = r.gradient;
    return r.value;
}

BatchLoss evaluate_batch(const Objective& objective, const Eigen::MatrixXd& logits,
                         std::span<const NodeId> labels, bool with_gradient, int threads) {
    const int n = static_cast<int>(logits.rows());
    if (static_cast<std::size_t>(n) != labels.size()) {
        throw InputError("logit rows and labels differ in length");
    }
    if (n == 0) throw InputError("empty batch");
    if (logits.cols() != objective.class_count()) {
        throw InputError("logit width does not match the class count");
    }
    BatchLoss out;
    out.per_sample.resize(n);
    // Row-major scratch keeps each sample's gradient contiguous.
    Eigen::MatrixXd grad_t;
    if (with_gradient) grad_t.resize(logits.cols(), n);
    parallel_for(n, threads, [&](int i) {
        const Eigen::VectorXd row = logits.row(i).transpose();
        if (with_gradient) {
            out.per_sample[i] = objective.value_and_grad(row, labels[i], grad_t.col(i));
        } else {
            out.per_sample[i] = objective.value(row, labels[i]);
        }
    });
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += out.per_sample[i];
    out.mean = sum / n;
    if (with_gradient) out.gradient = grad_t.transpose() / static_cast<double>(n);
    return out;
}

} // namespace hloss
