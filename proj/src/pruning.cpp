#include "hloss/pruning.hpp"

#include <algorithm>
#include <cmath>

#include "hloss/errors.hpp"

namespace hloss {

namespace {

constexpr double kBalanceTolerance = 1e-9;
constexpr double kGridTolerance = 1e-12;

void require_half_balanced(const WeightedHierarchy& wh) {
    if (std::abs(wh.balance_constant() - 0.5) > 1e-12) {
        throw InputError("pruning needs a weighting balanced to 1/2 (renormalize it first)");
    }
    if (!wh.is_balanced(kBalanceTolerance)) {
        throw InputError("pruning needs a balanced weighting");
    }
}

double node_level(const WeightedHierarchy& wh, NodeId j) {
    return wh.tree().is_leaf(j) ? wh.balance_constant() : wh.cumulative(j);
}

} // namespace

PrunedPartition prune(const WeightedHierarchy& wh, double tau) {
    if (!(tau > 0.0 && tau <= 0.5)) {
        throw InputError("pruning threshold must lie in (0, 1/2]");
    }
    require_half_balanced(wh);
    const Hierarchy& h = wh.tree();

    // Walking down from the root, the first node reaching tau is the unique
    // node on the path whose parent is still below it.
    std::vector<NodeId> cut(h.leaf_count());
    for (NodeId k = 1; k <= h.leaf_count(); ++k) {
        const auto path = h.ancestors(k);
        auto it = std::find_if(path.rbegin(), path.rend(),
                               [&](NodeId j) { return node_level(wh, j) >= tau; });
        cut[k - 1] = *it;  // the leaf itself always qualifies
    }

    PrunedPartition out;
    out.threshold = tau;
    out.group_of.assign(h.leaf_count(), -1);
    for (NodeId k = 1; k <= h.leaf_count(); ++k) {
        if (out.group_of[k - 1] >= 0) continue;
        const NodeId node = cut[k - 1];
        const auto members = h.leaves_under(node);
        const int index = static_cast<int>(out.groups.size());
        out.groups.push_back({node, {members.begin(), members.end()}});
        std::sort(out.groups.back().leaves.begin(), out.groups.back().leaves.end());
        for (NodeId m : members) out.group_of[m - 1] = index;
    }
    return out;
}

std::vector<double> tau_grid(const WeightedHierarchy& wh) {
    require_half_balanced(wh);
    const Hierarchy& h = wh.tree();
    std::vector<double> values{0.5};
    for (NodeId j = 1; j < h.node_count(); ++j) {
        const double c = node_level(wh, j);
        if (c > 0.0 && c <= 0.5) values.push_back(c);
    }
    std::sort(values.begin(), values.end());
    std::vector<double> grid;
    for (double v : values) {
        if (grid.empty() || v - grid.back() > kGridTolerance) grid.push_back(v);
    }
    grid.back() = 0.5;
    return grid;
}

} // namespace hloss
