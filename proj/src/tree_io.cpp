#include "hloss/tree_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hloss/errors.hpp"
#include "json.hpp"

namespace hloss {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string id_string(const json& value, const char* what) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    throw ParseError(std::string("field '") + what + "' must be a string or an integer");
}

Hierarchy parse_json_document(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed tree document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ParseError("tree document must be an object with a 'nodes' array");
    }
    std::vector<RawNode> nodes;
    for (const auto& entry : doc["nodes"]) {
        if (!entry.is_object() || !entry.contains("id")) {
            throw ParseError("every node entry needs an 'id'");
        }
        RawNode node;
        node.id = id_string(entry["id"], "id");
        if (entry.contains("parent") && !entry["parent"].is_null()) {
            node.parent = id_string(entry["parent"], "parent");
        }
        if (entry.contains("name")) {
            if (!entry["name"].is_string()) throw ParseError("field 'name' must be a string");
            node.name = entry["name"].get<std::string>();
        }
        if (entry.contains("leaf")) {
            if (!entry["leaf"].is_boolean()) throw ParseError("field 'leaf' must be a boolean");
            node.declared_leaf = entry["leaf"].get<bool>();
        }
        if (entry.contains("original_id")) {
            node.original_id = id_string(entry["original_id"], "original_id");
        }
        nodes.push_back(std::move(node));
    }
    return Hierarchy::from_nodes(nodes);
}

Hierarchy parse_edge_list(std::string_view text) {
    std::vector<RawNode> nodes;
    std::unordered_map<std::string, std::size_t> index_of;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = index_of.emplace(id, nodes.size());
        if (inserted) {
            RawNode node;
            node.id = id;
            node.name = id;
            nodes.push_back(std::move(node));
        }
        return it->second;
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        std::string child, parent, extra;
        if (const auto tab = line.find('\t'); tab != std::string_view::npos) {
            child = std::string(trim(line.substr(0, tab)));
            parent = std::string(trim(line.substr(tab + 1)));
            if (parent.find('\t') != std::string::npos) extra = "x";
        } else {
            std::istringstream fields{std::string(line)};
            fields >> child >> parent >> extra;
        }
        if (child.empty() || parent.empty() || !extra.empty()) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 'child<TAB>parent'");
        }
        const auto c = intern(child);
        intern(parent);
        if (nodes[c].parent) {
            throw ParseError("duplicate id '" + child + "' (declared with two parents, line " +
                             std::to_string(line_no) + ")");
        }
        nodes[c].parent = parent;
    }
    if (nodes.empty()) throw ParseError("edge list contains no edges");
    return Hierarchy::from_nodes(nodes);
}

} // namespace

Hierarchy parse_hierarchy(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        const auto line = trim(text.substr(pos, end == std::string_view::npos ? text.npos : end - pos));
        if (!line.empty() && line.front() != '#') {
            if (line.front() == '{') return parse_json_document(text.substr(pos));
            break;
        }
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return parse_edge_list(text);
}

Hierarchy load_hierarchy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open tree file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_hierarchy(buffer.str());
}

std::string serialize_hierarchy(const Hierarchy& h) {
    json nodes = json::array();
    for (NodeId j = 0; j < h.node_count(); ++j) {
        json entry;
        entry["id"] = j;
        entry["parent"] = j == kRoot ? json(nullptr) : json(h.parent(j));
        entry["name"] = h.name(j);
        entry["original_id"] = h.original_id(j);
        nodes.push_back(std::move(entry));
    }
    json doc;
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

} // namespace hloss
