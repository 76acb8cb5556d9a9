#pragma once

#include <vector>

#include "hloss/hierarchy.hpp"
#include "hloss/random.hpp"

namespace hloss {

/// Seven classes under three superclasses:
///   root -> {1, 8, 10}, 8 -> {2, 3, 4}, 10 -> {5, 9}, 9 -> {6, 7}.
Hierarchy seven_leaf_taxonomy();

/// K classes attached directly to the root.
Hierarchy flat_hierarchy(int classes);

/// Three classes: class 1 under the root, classes 2 and 3 under one superclass.
Hierarchy three_leaf_tree();

/// Every unlabeled rooted tree shape with at most `max_nodes` nodes (root
/// included) and at most `max_leaves` leaves, smallest first. Single-child
/// chains are included.
std::vector<Hierarchy> enumerate_tree_shapes(int max_nodes, int max_leaves);

/// Random recursive tree with 2..max_nodes nodes: node i attaches to a
/// uniformly chosen earlier node.
Hierarchy random_hierarchy(Rng& rng, int max_nodes);

} // namespace hloss
