#pragma once

#include "sanova/common.hpp"

#include <iosfwd>
#include <utility>

namespace sanova {

// Areal adjacency structure: N regions with symmetric neighbor lists.
struct RegionGraph {
    int n_regions = 0;
    std::vector<std::vector<int>> neighbors;  // sorted, deduplicated, symmetric
    std::vector<std::string> warnings;        // e.g. symmetrized asymmetric input

    int degree(int i) const { return static_cast<int>(neighbors.at(i).size()); }
};

// Build a graph from an edge list.  Pairs are undirected; duplicates are
// merged.  Self-loops and out-of-range indices are rejected.
RegionGraph build_graph(int n_regions, const std::vector<std::pair<int, int>>& pairs);

// Parse the plain-text adjacency format: one line per region,
// `region_id: n1 n2 n3 ...`, 0-based ids, `#` starts a comment.  Every region
// 0..N-1 must appear exactly once; an id listed on line i but whose own line
// omits i is symmetrized and recorded as a warning.
RegionGraph read_adjacency(std::istream& in);
RegionGraph load_adjacency(const std::string& path);
void write_adjacency(std::ostream& out, const RegionGraph& graph);

// Number of connected components ("islands").
int count_islands(const RegionGraph& graph);

// Component label (0-based) per region, labels ordered by smallest member.
std::vector<int> component_labels(const RegionGraph& graph);

}  // namespace sanova
