#ifndef CZK_TESTS_ORACLES_HPP_
#define CZK_TESTS_ORACLES_HPP_

// Test-side oracles, kept independent of the library paths they check:
// exhaustive circuit satisfiability, 3-colorability by search, and small
// statistics helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "czk/graph.hpp"
#include "czk/statement_compiler.hpp"

namespace czk::test {

// Exhaustive satisfiability over all 2^inputs assignments.
inline std::optional<std::vector<std::uint8_t>> exhaustive_sat(const Circuit& c) {
    const int n = c.n_inputs();
    if (n > 24) throw std::runtime_error("exhaustive_sat: too many inputs");
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        std::vector<std::uint8_t> in(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = (mask >> i) & 1;
        if (c.eval(in)) return in;
    }
    return std::nullopt;
}

// Ordered exhaustive 3-coloring search for small graphs: vertex by vertex
// with neighbor pruning, which visits every consistent prefix.
inline bool three_colorable_bruteforce(const Graph& g) {
    const int n = g.n;
    std::vector<std::vector<int>> earlier(static_cast<std::size_t>(n));
    for (const auto& [u, v] : g.edges) earlier[static_cast<std::size_t>(v)].push_back(u);
    std::vector<int> color(static_cast<std::size_t>(n), -1);
    std::function<bool(int)> go = [&](int v) -> bool {
        if (v == n) return true;
        for (int c = 0; c < 3; ++c) {
            bool ok = true;
            for (int u : earlier[static_cast<std::size_t>(v)])
                if (color[static_cast<std::size_t>(u)] == c) { ok = false; break; }
            if (!ok) continue;
            color[static_cast<std::size_t>(v)] = c;
            if (go(v + 1)) return true;
        }
        color[static_cast<std::size_t>(v)] = -1;
        return false;
    };
    return go(0);
}

// Candidate-mask backtracker: full propagation worklist plus
// fewest-candidates-first branching. Handles the reduction instances of
// the corpus, both satisfiable and not.
class ThreeColSolver {
public:
    explicit ThreeColSolver(const Graph& g) : n_(g.n), adj_(static_cast<std::size_t>(g.n)) {
        for (const auto& [u, v] : g.edges) {
            adj_[static_cast<std::size_t>(u)].push_back(v);
            adj_[static_cast<std::size_t>(v)].push_back(u);
        }
        mask_.assign(static_cast<std::size_t>(n_), 7);
    }

    bool solve() {
        if (n_ == 0) return true;
        // Symmetry break: pin the first vertex, and one of its neighbors
        // when available.
        if (!assign(0, 0)) return false;
        if (!adj_[0].empty()) {
            const int u = adj_[0][0];
            if (mask_[static_cast<std::size_t>(u)] & 2) {
                trail_.clear();
                if (!assign(u, 1)) return false;
            }
        }
        trail_.clear();
        return search();
    }

private:
    // Removes color c from v's candidates; propagates singletons. Records
    // every mask change on the trail for backtracking.
    bool remove(int v, int bit) {
        auto& m = mask_[static_cast<std::size_t>(v)];
        if (!(m & bit)) return true;
        trail_.push_back({v, m});
        m &= ~bit;
        if (m == 0) return false;
        if ((m & (m - 1)) == 0) queue_.push_back(v);  // became a singleton
        return true;
    }

    bool assign(int v, int color) {
        const int bit = 1 << color;
        auto& m = mask_[static_cast<std::size_t>(v)];
        if (!(m & bit)) return false;
        if (m != bit) {
            trail_.push_back({v, m});
            m = bit;
        }
        queue_.push_back(v);
        return drain();
    }

    bool drain() {
        while (!queue_.empty()) {
            const int v = queue_.back();
            queue_.pop_back();
            const int m = mask_[static_cast<std::size_t>(v)];
            if ((m & (m - 1)) != 0) continue;  // no longer a singleton
            for (int u : adj_[static_cast<std::size_t>(v)])
                if (!remove(u, m)) {
                    queue_.clear();
                    return false;
                }
        }
        return true;
    }

    bool search() {
        // Fewest candidates first.
        int best = -1, best_count = 4;
        for (int v = 0; v < n_; ++v) {
            const int m = mask_[static_cast<std::size_t>(v)];
            const int count = ((m >> 0) & 1) + ((m >> 1) & 1) + ((m >> 2) & 1);
            if (count > 1 && count < best_count) {
                best = v;
                best_count = count;
                if (count == 2) break;
            }
        }
        if (best < 0) return true;  // everything is a singleton
        const int m = mask_[static_cast<std::size_t>(best)];
        for (int c = 0; c < 3; ++c) {
            if (!(m & (1 << c))) continue;
            const std::size_t mark = trail_.size();
            if (assign(best, c) && search()) return true;
            while (trail_.size() > mark) {
                mask_[static_cast<std::size_t>(trail_.back().first)] = trail_.back().second;
                trail_.pop_back();
            }
            queue_.clear();
        }
        return false;
    }

    int n_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> mask_;
    std::vector<std::pair<int, int>> trail_;
    std::vector<int> queue_;
};

inline bool three_colorable(const Graph& g) {
    if (g.n <= 20) return three_colorable_bruteforce(g);
    return ThreeColSolver(g).solve();
}

// Two-sample chi-square statistic over shared buckets.
inline double chi_square_two_sample(const std::vector<long long>& a,
                                    const std::vector<long long>& b) {
    double na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
    double stat = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = static_cast<double>(a[i]), bi = static_cast<double>(b[i]);
        if (ai + bi == 0) continue;
        const double d = ka * ai - kb * bi;
        stat += d * d / (ai + bi);
    }
    return stat;
}

}  // namespace czk::test

#endif  // CZK_TESTS_ORACLES_HPP_
