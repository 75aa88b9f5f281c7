#pragma once

#include <vector>

namespace dynmatch {

/// Maximum-cardinality matching in a general undirected graph given as an
/// adjacency list (Edmonds' blossom algorithm, union-find blossom bases).
/// Returns mate[v] (or -1 for unmatched vertices). Self-loops are ignored.
std::vector<int> maximum_matching(const std::vector<std::vector<int>>& adjacency);

// Number of matched pairs in a mate vector.
int matching_size(const std::vector<int>& mate);

}  // namespace dynmatch
