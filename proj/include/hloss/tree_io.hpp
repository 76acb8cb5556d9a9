#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hloss/hierarchy.hpp"

namespace hloss {

/// Parses a tree document. Two forms are accepted:
///  - a JSON object `{"nodes": [{"id": .., "parent": .., "name": ..}, ...]}`
///    where the root has a null or absent parent (optional `leaf` flag and
///    `original_id` per node);
///  - a tab-separated `child<TAB>parent` edge list with `#` comments.
/// Lines starting with `#` before a JSON document are skipped.
Hierarchy parse_hierarchy(std::string_view text);

Hierarchy load_hierarchy(const std::filesystem::path& path);

/// JSON form with normalized ids and an `original_id` field per node.
std::string serialize_hierarchy(const Hierarchy& h);

} // namespace hloss
