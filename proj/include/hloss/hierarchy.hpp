#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hloss {

using NodeId = int;

inline constexpr NodeId kRoot = 0;
inline constexpr NodeId kNoParent = -1;

/// One node as declared in an input document, before renumbering.
struct RawNode {
    std::string id;
    std::optional<std::string> parent;
    std::string name;
    /// Set when the document explicitly marks the node as a class leaf.
    bool declared_leaf = false;
    /// Label kept as original_id; defaults to `id`.
    std::optional<std::string> original_id;
};

/// Rooted class tree with normalized indexing.
///
/// The root is node 0, the K leaves (fine-grained classes) are 1..K, and
/// internal nodes follow as K+1..n-1 ordered by height, then by declaration
/// order. Instances are immutable once built; every query is const.
class Hierarchy {
public:
    /// Validates and renumbers a declared tree. Leaves keep their declaration
    /// order. Throws ParseError on cycles, multiple roots, orphans, duplicate
    /// ids and declared leaves that have children.
    static Hierarchy from_nodes(const std::vector<RawNode>& nodes);

    /// Convenience builder: `parents[i]` is the parent index of node i, or -1
    /// for the root. Indices are arbitrary; they become the original ids.
    static Hierarchy from_parents(const std::vector<int>& parents);

    int node_count() const { return static_cast<int>(parent_.size()); }
    int leaf_count() const { return leaf_count_; }

    bool contains(NodeId j) const { return j >= 0 && j < node_count(); }
    bool is_leaf(NodeId j) const { return j >= 1 && j <= leaf_count_; }

    NodeId parent(NodeId j) const;
    std::span<const NodeId> children(NodeId j) const;
    int height(NodeId j) const;
    int depth(NodeId j) const;
    const std::string& name(NodeId j) const;
    const std::string& original_id(NodeId j) const;

    /// Leaf ids subsumed by node j, in depth-first order (children visited by
    /// ascending id). {j} for a leaf, every leaf for the root. The order is
    /// ascending whenever leaves were declared in depth-first order.
    std::span<const NodeId> leaves_under(NodeId j) const;

    /// All leaves in depth-first order; leaves_under(j) is the contiguous
    /// slice [leaf_interval(j).first, leaf_interval(j).second) of it.
    std::span<const NodeId> leaf_order() const { return leaf_order_; }
    std::pair<int, int> leaf_interval(NodeId j) const;

    /// Path from j up to the root, j included and root excluded.
    std::vector<NodeId> ancestors(NodeId j) const;

    /// Deepest node having both arguments in its subtree (root counts).
    NodeId lca(NodeId a, NodeId b) const;

    /// Nodes ordered so that every parent precedes its children (root first).
    std::span<const NodeId> top_down_order() const { return top_down_; }

    /// Throws InputError when j is not a node of this tree.
    void check_node(NodeId j) const;
    /// Throws InputError when j is not a leaf of this tree.
    void check_leaf(NodeId j) const;

    bool operator==(const Hierarchy& other) const;

private:
    Hierarchy() = default;
    void finalize();
    void build_lifting_table();

    std::vector<NodeId> parent_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<NodeId> leaf_order_;
    std::vector<std::pair<int, int>> leaf_interval_;
    std::vector<int> height_;
    std::vector<int> depth_;
    std::vector<std::string> names_;
    std::vector<std::string> original_ids_;
    std::vector<NodeId> top_down_;
    int leaf_count_ = 0;

    // up_[k][v] is the 2^k-th ancestor of v; only populated for large trees.
    std::vector<std::vector<NodeId>> up_;
};

/// Node count above which lca() switches from pointer walking to binary lifting.
inline constexpr int kLiftingThreshold = 100000;

} // namespace hloss
