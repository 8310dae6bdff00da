#include "sanova/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace sanova {

namespace {

void check_index(int idx, int n) {
    if (idx < 0 || idx >= n) {
        throw std::invalid_argument("region index " + std::to_string(idx) +
                                    " out of range [0, " + std::to_string(n) + ")");
    }
}

}  // namespace

RegionGraph build_graph(int n_regions, const std::vector<std::pair<int, int>>& pairs) {
    if (n_regions <= 0) throw std::invalid_argument("graph needs at least one region");
    std::vector<std::set<int>> adj(n_regions);
    for (const auto& [a, b] : pairs) {
        check_index(a, n_regions);
        check_index(b, n_regions);
        if (a == b) {
            throw std::invalid_argument("self-loop on region " + std::to_string(a));
        }
        adj[a].insert(b);
        adj[b].insert(a);
    }
    RegionGraph g;
    g.n_regions = n_regions;
    g.neighbors.reserve(n_regions);
    for (auto& s : adj) g.neighbors.emplace_back(s.begin(), s.end());
    return g;
}

RegionGraph read_adjacency(std::istream& in) {
    std::vector<std::pair<int, std::vector<int>>> rows;
    std::string line;
    int max_id = -1;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;  // blank line
        if (head.back() != ':') {
            throw std::invalid_argument("malformed adjacency line (expected `id:`): " + line);
        }
        head.pop_back();
        int id = 0;
        try {
            id = std::stoi(head);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad region id in adjacency line: " + line);
        }
        std::vector<int> nbrs;
        int v;
        while (ls >> v) nbrs.push_back(v);
        if (!ls.eof()) throw std::invalid_argument("bad neighbor id in adjacency line: " + line);
        rows.emplace_back(id, std::move(nbrs));
        max_id = std::max(max_id, id);
    }
    if (rows.empty()) throw std::invalid_argument("empty adjacency file");
    const int n = static_cast<int>(rows.size());
    if (max_id != n - 1) {
        throw std::invalid_argument("adjacency file must list regions 0.." +
                                    std::to_string(n - 1) + " exactly once");
    }
    std::vector<bool> seen(n, false);
    std::vector<std::vector<int>> listed(n);
    for (auto& [id, nbrs] : rows) {
        check_index(id, n);
        if (seen[id]) throw std::invalid_argument("duplicate region line " + std::to_string(id));
        seen[id] = true;
        listed[id] = std::move(nbrs);
    }

    std::vector<std::pair<int, int>> pairs;
    std::vector<std::string> warnings;
    for (int i = 0; i < n; ++i) {
        for (int j : listed[i]) {
            check_index(j, n);
            if (j == i) throw std::invalid_argument("self-loop on region " + std::to_string(i));
            pairs.emplace_back(i, j);
            if (std::find(listed[j].begin(), listed[j].end(), i) == listed[j].end()) {
                warnings.push_back("asymmetric adjacency: " + std::to_string(i) + " lists " +
                                   std::to_string(j) + " but not vice versa; symmetrized");
            }
        }
    }
    RegionGraph g = build_graph(n, pairs);
    g.warnings = std::move(warnings);
    return g;
}

RegionGraph load_adjacency(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open adjacency file: " + path);
    try {
        return read_adjacency(in);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void write_adjacency(std::ostream& out, const RegionGraph& graph) {
    for (int i = 0; i < graph.n_regions; ++i) {
        out << i << ":";
        for (int j : graph.neighbors[i]) out << ' ' << j;
        out << '\n';
    }
}

std::vector<int> component_labels(const RegionGraph& graph) {
    std::vector<int> label(graph.n_regions, -1);
    int next = 0;
    for (int start = 0; start < graph.n_regions; ++start) {
        if (label[start] >= 0) continue;
        std::deque<int> queue{start};
        label[start] = next;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : graph.neighbors[u]) {
                if (label[v] < 0) {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        ++next;
    }
    return label;
}

int count_islands(const RegionGraph& graph) {
    auto labels = component_labels(graph);
    return 1 + *std::max_element(labels.begin(), labels.end());
}

}  // namespace sanova
