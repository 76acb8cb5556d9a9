#include "hloss/shapes.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "hloss/errors.hpp"

namespace hloss {

namespace {

// Canonical (AHU) encoding of the subtree rooted at v.
std::string canonical(const std::vector<std::vector<int>>& children, int v) {
    std::vector<std::string> parts;
    for (int c : children[v]) parts.push_back(canonical(children, c));
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (const auto& p : parts) out += p;
    return out + ")";
}

} // namespace

Hierarchy seven_leaf_taxonomy() {
    std::vector<RawNode> nodes;
    auto add = [&](std::string id, std::optional<std::string> parent) {
        RawNode n;
        n.id = std::move(id);
        n.parent = std::move(parent);
        nodes.push_back(std::move(n));
    };
    add("0", std::nullopt);
    for (int k = 1; k <= 7; ++k) {
        static const char* parents[] = {"0", "8", "8", "8", "10", "9", "9"};
        add(std::to_string(k), parents[k - 1]);
    }
    add("8", "0");
    add("9", "10");
    add("10", "0");
    return Hierarchy::from_nodes(nodes);
}

Hierarchy flat_hierarchy(int classes) {
    if (classes < 1) throw InputError("a flat tree needs at least one class");
    std::vector<int> parents(classes + 1, 0);
    parents[0] = -1;
    return Hierarchy::from_parents(parents);
}

Hierarchy three_leaf_tree() {
    // 0 root, 1 class, 2 superclass, 3 and 4 classes
    return Hierarchy::from_parents({-1, 0, 0, 2, 2});
}

std::vector<Hierarchy> enumerate_tree_shapes(int max_nodes, int max_leaves) {
    if (max_nodes > 9) throw InputError("shape enumeration is limited to 9 nodes");
    std::map<std::pair<int, std::string>, Hierarchy> shapes;
    for (int n = 2; n <= max_nodes; ++n) {
        // Every recursive tree (parent[i] < i) once; dedupe by canonical form.
        std::vector<int> parents(n, 0);
        parents[0] = -1;
        while (true) {
            std::vector<std::vector<int>> children(n);
            for (int i = 1; i < n; ++i) children[parents[i]].push_back(i);
            int leaves = 0;
            for (int i = 1; i < n; ++i) leaves += children[i].empty();
            if (leaves <= max_leaves) {
                auto key = std::make_pair(n, canonical(children, 0));
                if (!shapes.count(key)) shapes.emplace(key, Hierarchy::from_parents(parents));
            }
            int i = n - 1;
            while (i >= 1 && parents[i] == i - 1) parents[i--] = 0;
            if (i < 1) break;
            ++parents[i];
        }
    }
    std::vector<Hierarchy> out;
    for (auto& [key, h] : shapes) out.push_back(std::move(h));
    return out;
}

Hierarchy random_hierarchy(Rng& rng, int max_nodes) {
    if (max_nodes < 2) throw InputError("a tree needs at least two nodes");
    const int n = rng.uniform_int(2, max_nodes);
    std::vector<int> parents(n, -1);
    for (int i = 1; i < n; ++i) parents[i] = rng.uniform_int(0, i - 1);
    return Hierarchy::from_parents(parents);
}

} // namespace hloss
