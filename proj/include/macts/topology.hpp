#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "macts/rng.hpp"

namespace macts {

/// Undirected weighted graph. Edges are stored once per unordered pair
/// (u < v); every consumer treats an edge as the symmetric pair of links
/// (u,v) and (v,u). Self-loops are rejected.
struct Topology {
    struct Edge {
        int u = 0;
        int v = 0;
        double weight = 1.0;
    };

    int n = 0;
    std::vector<Edge> edges;

    void add_edge(int u, int v, double weight = 1.0) {
        if (u == v) throw std::invalid_argument("self-loops are not allowed");
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (!(weight > 0.0)) throw std::invalid_argument("edge weight must be > 0");
        if (u > v) std::swap(u, v);
        edges.push_back({u, v, weight});
    }
};

/// Neighbor lists (id, weight), sorted by neighbor id.
inline std::vector<std::vector<std::pair<int, double>>> adjacency_lists(const Topology& t) {
    std::vector<std::vector<std::pair<int, double>>> adj(t.n);
    for (const auto& e : t.edges) {
        adj[e.u].emplace_back(e.v, e.weight);
        adj[e.v].emplace_back(e.u, e.weight);
    }
    for (auto& lst : adj) std::sort(lst.begin(), lst.end());
    return adj;
}

inline std::vector<double> weighted_degrees(const Topology& t) {
    std::vector<double> deg(t.n, 0.0);
    for (const auto& e : t.edges) {
        deg[e.u] += e.weight;
        deg[e.v] += e.weight;
    }
    return deg;
}

inline bool is_connected(const Topology& t) {
    if (t.n <= 0) return false;
    if (t.n == 1) return true;
    const auto adj = adjacency_lists(t);
    std::vector<char> seen(t.n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const auto& [v, w] : adj[u]) {
            (void)w;
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == t.n;
}

/// Hop distances from `source` (unit edge lengths), -1 where unreachable.
inline std::vector<int> hop_distances(const Topology& t, int source) {
    const auto adj = adjacency_lists(t);
    std::vector<int> dist(t.n, -1);
    std::queue<int> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const auto& [v, w] : adj[u]) {
            (void)w;
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

inline int diameter(const Topology& t) {
    int d = 0;
    for (int s = 0; s < t.n; ++s) {
        for (int x : hop_distances(t, s)) {
            if (x < 0) throw std::invalid_argument("diameter of a disconnected graph");
            d = std::max(d, x);
        }
    }
    return d;
}

/// 4-neighbor lattice with rows*cols nodes, node id = row*cols + col.
inline Topology build_grid(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid dimensions must be positive");
    if (rows * cols < 2) throw std::invalid_argument("grid needs at least two nodes");
    Topology t;
    t.n = rows * cols;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int u = r * cols + c;
            if (c + 1 < cols) t.add_edge(u, u + 1);
            if (r + 1 < rows) t.add_edge(u, u + cols);
        }
    }
    return t;
}

inline Topology build_line(int n) { return build_grid(1, n); }

/// Uniform placement in the unit square, edge iff Euclidean distance <= radius.
/// Redraws with fresh seed-derived positions until connected; throws after
/// `max_attempts` failures.
inline Topology build_random_geometric(int n, double radius, std::uint64_t seed,
                                       int max_attempts = 100) {
    if (n < 2) throw std::invalid_argument("random geometric graph needs n >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
    std::mt19937_64 rng{mix64(seed ^ static_cast<std::uint64_t>(StreamPurpose::placement))};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<std::pair<double, double>> pts(n);
        for (auto& p : pts) p = {unit(rng), unit(rng)};
        Topology t;
        t.n = n;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double dx = pts[i].first - pts[j].first;
                const double dy = pts[i].second - pts[j].second;
                if (dx * dx + dy * dy <= radius * radius) t.add_edge(i, j);
            }
        }
        if (is_connected(t)) return t;
    }
    throw std::runtime_error("no connected random geometric graph within attempt budget");
}

/// Edge-list serialization, one "u v weight" line per undirected edge,
/// zero-based node ids. The first line "n <count>" records the node count so
/// isolated nodes round-trip.
inline void write_edge_list(std::ostream& os, const Topology& t) {
    os << "n " << t.n << "\n";
    auto sorted = t.edges;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (const auto& e : sorted) os << e.u << " " << e.v << " " << e.weight << "\n";
}

inline Topology read_edge_list(std::istream& is) {
    Topology t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "n") {
            ls >> t.n;
            continue;
        }
        const int u = std::stoi(head);
        int v = 0;
        double w = 1.0;
        if (!(ls >> v)) throw std::runtime_error("malformed edge line: " + line);
        ls >> w;
        t.n = std::max(t.n, std::max(u, v) + 1);
        t.add_edge(u, v, w);
    }
    return t;
}

} // namespace macts
