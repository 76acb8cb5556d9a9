#include "hloss/hierarchy.hpp"

#include <algorithm>
#include <unordered_map>

#include "hloss/errors.hpp"

namespace hloss {

Hierarchy Hierarchy::from_nodes(const std::vector<RawNode>& nodes) {
    const int n = static_cast<int>(nodes.size());
    std::unordered_map<std::string, int> index_of;
    index_of.reserve(nodes.size());
    for (int i = 0; i < n; ++i) {
        if (!index_of.emplace(nodes[i].id, i).second) {
            throw ParseError("duplicate id '" + nodes[i].id + "'");
        }
    }

    std::vector<int> parent(n, -1);
    std::vector<int> roots;
    for (int i = 0; i < n; ++i) {
        if (!nodes[i].parent) {
            roots.push_back(i);
            continue;
        }
        const auto it = index_of.find(*nodes[i].parent);
        if (it == index_of.end()) {
            throw ParseError("orphan node '" + nodes[i].id + "': parent '" + *nodes[i].parent +
                             "' is not declared");
        }
        if (it->second == i) {
            throw ParseError("cycle detected: node '" + nodes[i].id + "' is its own parent");
        }
        parent[i] = it->second;
    }
    if (roots.empty()) {
        throw ParseError(n == 0 ? "empty tree document" : "cycle detected: no root node");
    }
    if (roots.size() > 1) {
        throw ParseError("multiple roots: '" + nodes[roots[0]].id + "' and '" +
                         nodes[roots[1]].id + "'");
    }
    const int root = roots.front();

    std::vector<std::vector<int>> children(n);
    for (int i = 0; i < n; ++i) {
        if (parent[i] >= 0) children[parent[i]].push_back(i);
    }

    // Breadth-first from the root; anything unreached sits on a cycle.
    std::vector<int> order;
    order.reserve(n);
    order.push_back(root);
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (int c : children[order[head]]) order.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) {
        std::vector<bool> seen(n, false);
        for (int v : order) seen[v] = true;
        const auto bad = std::find(seen.begin(), seen.end(), false) - seen.begin();
        throw ParseError("cycle detected through node '" + nodes[bad].id + "'");
    }
    if (children[root].empty()) {
        throw ParseError("tree needs at least one leaf below the root");
    }
    for (int i = 0; i < n; ++i) {
        if (nodes[i].declared_leaf && !children[i].empty()) {
            throw ParseError("leaf '" + nodes[i].id + "' is declared with children");
        }
    }

    std::vector<int> file_height(n, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        for (int c : children[*it]) {
            file_height[*it] = std::max(file_height[*it], file_height[c] + 1);
        }
    }

    std::vector<int> leaves;
    std::vector<int> internals;
    for (int i = 0; i < n; ++i) {
        if (i == root) continue;
        (children[i].empty() ? leaves : internals).push_back(i);
    }
    std::stable_sort(internals.begin(), internals.end(),
                     [&](int a, int b) { return file_height[a] < file_height[b]; });

    std::vector<NodeId> new_id(n);
    new_id[root] = kRoot;
    NodeId next = 1;
    for (int i : leaves) new_id[i] = next++;
    for (int i : internals) new_id[i] = next++;

    Hierarchy h;
    h.leaf_count_ = static_cast<int>(leaves.size());
    h.parent_.assign(n, kNoParent);
    h.children_.assign(n, {});
    h.names_.assign(n, {});
    h.original_ids_.assign(n, {});
    for (int i = 0; i < n; ++i) {
        const NodeId j = new_id[i];
        h.parent_[j] = parent[i] < 0 ? kNoParent : new_id[parent[i]];
        for (int c : children[i]) h.children_[j].push_back(new_id[c]);
        std::sort(h.children_[j].begin(), h.children_[j].end());
        h.names_[j] = nodes[i].name;
        h.original_ids_[j] = nodes[i].original_id.value_or(nodes[i].id);
    }
    h.finalize();
    return h;
}

Hierarchy Hierarchy::from_parents(const std::vector<int>& parents) {
    std::vector<RawNode> nodes(parents.size());
    for (std::size_t i = 0; i < parents.size(); ++i) {
        nodes[i].id = std::to_string(i);
        if (parents[i] >= 0) nodes[i].parent = std::to_string(parents[i]);
    }
    return from_nodes(nodes);
}

void Hierarchy::finalize() {
    const int n = node_count();
    top_down_.clear();
    top_down_.reserve(n);
    top_down_.push_back(kRoot);
    for (std::size_t head = 0; head < top_down_.size(); ++head) {
        for (NodeId c : children_[top_down_[head]]) top_down_.push_back(c);
    }

    depth_.assign(n, 0);
    for (NodeId j : top_down_) {
        if (j != kRoot) depth_[j] = depth_[parent_[j]] + 1;
    }

    height_.assign(n, 0);
    for (auto it = top_down_.rbegin(); it != top_down_.rend(); ++it) {
        const NodeId j = *it;
        for (NodeId c : children_[j]) height_[j] = std::max(height_[j], height_[c] + 1);
    }

    // Preorder walk; each subtree's leaves end up contiguous.
    leaf_order_.clear();
    leaf_order_.reserve(leaf_count_);
    leaf_interval_.assign(n, {0, 0});
    std::vector<std::pair<NodeId, bool>> stack{{kRoot, false}};
    while (!stack.empty()) {
        auto [j, done] = stack.back();
        stack.pop_back();
        if (done) {
            leaf_interval_[j].second = static_cast<int>(leaf_order_.size());
            continue;
        }
        leaf_interval_[j].first = static_cast<int>(leaf_order_.size());
        if (children_[j].empty()) {
            leaf_order_.push_back(j);
            leaf_interval_[j].second = leaf_interval_[j].first + 1;
            continue;
        }
        stack.push_back({j, true});
        const auto& kids = children_[j];
        for (auto c = kids.rbegin(); c != kids.rend(); ++c) stack.push_back({*c, false});
    }

    up_.clear();
    if (n > kLiftingThreshold) build_lifting_table();
}

void Hierarchy::build_lifting_table() {
    const int n = node_count();
    int levels = 1;
    while ((1 << levels) < n) ++levels;
    up_.assign(levels, std::vector<NodeId>(n, kRoot));
    for (NodeId v = 1; v < n; ++v) up_[0][v] = parent_[v];
    for (int k = 1; k < levels; ++k) {
        for (NodeId v = 0; v < n; ++v) up_[k][v] = up_[k - 1][up_[k - 1][v]];
    }
}

void Hierarchy::check_node(NodeId j) const {
    if (!contains(j)) {
        throw InputError("unknown node id " + std::to_string(j));
    }
}

void Hierarchy::check_leaf(NodeId j) const {
    check_node(j);
    if (!is_leaf(j)) {
        throw InputError("node " + std::to_string(j) + " is not a leaf");
    }
}

NodeId Hierarchy::parent(NodeId j) const {
    check_node(j);
    return parent_[j];
}

std::span<const NodeId> Hierarchy::children(NodeId j) const {
    check_node(j);
    return children_[j];
}

int Hierarchy::height(NodeId j) const {
    check_node(j);
    return height_[j];
}

int Hierarchy::depth(NodeId j) const {
    check_node(j);
    return depth_[j];
}

const std::string& Hierarchy::name(NodeId j) const {
    check_node(j);
    return names_[j];
}

const std::string& Hierarchy::original_id(NodeId j) const {
    check_node(j);
    return original_ids_[j];
}

std::span<const NodeId> Hierarchy::leaves_under(NodeId j) const {
    check_node(j);
    const auto [first, last] = leaf_interval_[j];
    return std::span<const NodeId>(leaf_order_).subspan(first, last - first);
}

std::pair<int, int> Hierarchy::leaf_interval(NodeId j) const {
    check_node(j);
    return leaf_interval_[j];
}

std::vector<NodeId> Hierarchy::ancestors(NodeId j) const {
    check_node(j);
    if (j == kRoot) {
        throw InputError("the root has no ancestor set");
    }
    std::vector<NodeId> path;
    path.reserve(depth_[j]);
    for (NodeId v = j; v != kRoot; v = parent_[v]) path.push_back(v);
    return path;
}

NodeId Hierarchy::lca(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    if (up_.empty()) {
        while (depth_[a] > depth_[b]) a = parent_[a];
        while (depth_[b] > depth_[a]) b = parent_[b];
        while (a != b) {
            a = parent_[a];
            b = parent_[b];
        }
        return a;
    }
    if (depth_[a] < depth_[b]) std::swap(a, b);
    const int levels = static_cast<int>(up_.size());
    for (int k = levels - 1; k >= 0; --k) {
        if (depth_[a] - (1 << k) >= depth_[b]) a = up_[k][a];
    }
    if (a == b) return a;
    for (int k = levels - 1; k >= 0; --k) {
        if (up_[k][a] != up_[k][b]) {
            a = up_[k][a];
            b = up_[k][b];
        }
    }
    return parent_[a];
}

bool Hierarchy::operator==(const Hierarchy& other) const {
    return leaf_count_ == other.leaf_count_ && parent_ == other.parent_ &&
           children_ == other.children_ && names_ == other.names_;
}

} // namespace hloss
