#ifndef CZK_GRAPH_HPP_
#define CZK_GRAPH_HPP_

#include <string>
#include <utility>
#include <vector>

namespace czk {

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // u < v, sorted, no duplicates

    void add_edge(int u, int v);
    void normalize();
    bool has_edge(int u, int v) const;

    static Graph triangle();
    static Graph k4();
    static Graph cycle(int n);
    static Graph named(const std::string& name);  // triangle | k4 | cycle5 | cycle6
};

using Coloring = std::vector<int>;  // vertex -> {0, 1, 2}

bool proper_coloring(const Graph& g, const Coloring& c);

// Canonical colorings for the shipped witnesses.
Coloring triangle_coloring();
Coloring cycle_coloring(int n);

std::uint64_t graph_digest(const Graph& g);

}  // namespace czk

#endif  // CZK_GRAPH_HPP_
