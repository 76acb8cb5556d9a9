#pragma once

#include <vector>

#include "hloss/weighting.hpp"

namespace hloss {

/// One supernode of a pruned tree and the classes it subsumes.
struct PartitionGroup {
    NodeId node;
    std::vector<NodeId> leaves;
};

/// Coarsened label space obtained by cutting the weighted tree at threshold tau.
struct PrunedPartition {
    double threshold = 0.5;
    /// Ordered by smallest member leaf; together they partition 1..K.
    std::vector<PartitionGroup> groups;

    /// group_of[k - 1] is the index into `groups` of the group holding class k.
    std::vector<int> group_of;
};

/// Bottom-up pruning: keeps the nodes l whose ancestor-weight sums straddle tau,
///   cumulative(p(l)) < tau <= cumulative(l),
/// and collapses each onto the classes below it. Leaves count as exactly the
/// balance constant. Requires a balanced weighting with constant 1/2 and
/// 0 < tau <= 1/2.
PrunedPartition prune(const WeightedHierarchy& wh, double tau);

/// Thresholds at which the pruned partition changes: every distinct
/// cumulative weight in (0, 1/2] plus 1/2 itself, ascending.
std::vector<double> tau_grid(const WeightedHierarchy& wh);

} // namespace hloss
