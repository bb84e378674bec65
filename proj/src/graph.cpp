#include "czk/graph.hpp"

#include <algorithm>
#include <cstdint>

#include "czk/errors.hpp"
#include "czk/rng.hpp"

namespace czk {

void Graph::add_edge(int u, int v) {
    if (u == v) throw parameter_error("graph: self loop");
    if (u > v) std::swap(u, v);
    edges.emplace_back(u, v);
}

void Graph::normalize() {
    for (auto& e : edges)
        if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& e : edges)
        if (e.first < 0 || e.second >= n) throw parameter_error("graph: edge out of range");
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

Graph Graph::triangle() {
    Graph g;
    g.n = 3;
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    g.normalize();
    return g;
}

Graph Graph::k4() {
    Graph g;
    g.n = 4;
    for (int u = 0; u < 4; ++u)
        for (int v = u + 1; v < 4; ++v) g.add_edge(u, v);
    g.normalize();
    return g;
}

Graph Graph::cycle(int n) {
    if (n < 3) throw parameter_error("graph: cycle needs n >= 3");
    Graph g;
    g.n = n;
    for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
    g.normalize();
    return g;
}

Graph Graph::named(const std::string& name) {
    if (name == "triangle") return triangle();
    if (name == "k4") return k4();
    if (name == "cycle5") return cycle(5);
    if (name == "cycle6") return cycle(6);
    throw parameter_error("graph: unknown name: " + name);
}

bool proper_coloring(const Graph& g, const Coloring& c) {
    if (static_cast<int>(c.size()) != g.n) return false;
    for (int col : c)
        if (col < 0 || col > 2) return false;
    for (const auto& [u, v] : g.edges)
        if (c[static_cast<std::size_t>(u)] == c[static_cast<std::size_t>(v)]) return false;
    return true;
}

Coloring triangle_coloring() { return {0, 1, 2}; }

Coloring cycle_coloring(int n) {
    Coloring c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = i % 2;
    if (n % 2 == 1) c[static_cast<std::size_t>(n - 1)] = 2;
    return c;
}

std::uint64_t graph_digest(const Graph& g) {
    std::uint64_t h = chain(0x13198A2E03707344ULL, static_cast<std::uint64_t>(g.n));
    for (const auto& [u, v] : g.edges)
        h = chain(h, (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v));
    return h;
}

}  // namespace czk
