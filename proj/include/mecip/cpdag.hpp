#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "mecip/errors.hpp"
#include "mecip/graph.hpp"

namespace mecip {

/**
 * All immoralities (v-structures) of a DAG: triples (u, w, v) with
 * u -> v <- w and u, w non-adjacent, u < w. These are exactly the
 * orientation-identifying patterns of a Markov equivalence class.
 */
inline std::vector<std::tuple<int, int, int>> immoralities(const PartiallyDirectedGraph& g) {
    require_dag(g, "immoralities");
    std::vector<std::tuple<int, int, int>> out;
    for (int v = 0; v < g.node_count(); ++v) {
        const auto ps = g.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j)
                if (!g.adjacent(ps[i], ps[j])) out.emplace_back(ps[i], ps[j], v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

// The four Meek orientation rules, evaluated for turning a - b into a -> b.
inline bool meek_fires(const PartiallyDirectedGraph& g, int a, int b) {
    const int n = g.node_count();
    // R1: c -> a, a - b, c and b non-adjacent  =>  a -> b
    for (int c = 0; c < n; ++c)
        if (g.has_directed(c, a) && !g.adjacent(c, b)) return true;
    // R2: a -> c -> b with a - b  =>  a -> b
    for (int c = 0; c < n; ++c)
        if (g.has_directed(a, c) && g.has_directed(c, b)) return true;
    // R3: a - c, a - d, c -> b, d -> b, c and d non-adjacent  =>  a -> b
    for (int c = 0; c < n; ++c) {
        if (!(g.has_undirected(a, c) && g.has_directed(c, b))) continue;
        for (int d = c + 1; d < n; ++d)
            if (g.has_undirected(a, d) && g.has_directed(d, b) && !g.adjacent(c, d)) return true;
    }
    // R4: a - c, c -> d, d -> b, a and d adjacent, c and b non-adjacent  =>  a -> b
    for (int c = 0; c < n; ++c) {
        if (!(g.has_undirected(a, c) && !g.adjacent(c, b))) continue;
        for (int d = 0; d < n; ++d)
            if (g.has_directed(c, d) && g.has_directed(d, b) && g.adjacent(a, d)) return true;
    }
    return false;
}

} // namespace detail

/**
 * Closes a partially directed graph under Meek's four orientation rules.
 *
 * Rules only orient existing undirected edges; nothing is removed and no
 * directed edge is ever flipped. The fixed point is independent of the
 * order in which rules fire. Throws when the directed part of the input
 * contains a cycle, or when rule application produces one (which can only
 * happen for inputs that are not consistent PDAGs, e.g. an undirected
 * chordless 4-cycle).
 */
inline PartiallyDirectedGraph apply_meek(const PartiallyDirectedGraph& g) {
    if (!directed_part_acyclic(g)) throw argument_error("apply_meek: directed cycle in input");
    PartiallyDirectedGraph h = g;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [u, v] : h.undirected_edges()) {
            if (!h.has_undirected(u, v)) continue; // oriented earlier in this sweep
            if (detail::meek_fires(h, u, v)) {
                h.orient(u, v);
                changed = true;
            } else if (detail::meek_fires(h, v, u)) {
                h.orient(v, u);
                changed = true;
            }
        }
    }
    if (!directed_part_acyclic(h))
        throw argument_error("apply_meek: rules produced a directed cycle (input is not a consistent PDAG)");
    return h;
}

/**
 * The CPDAG of a DAG: skeleton plus immorality orientations, closed under
 * Meek's rules. Two DAGs map to the same CPDAG exactly when they share
 * skeleton and immoralities.
 */
inline PartiallyDirectedGraph cpdag_of(const PartiallyDirectedGraph& g) {
    require_dag(g, "cpdag_of");
    PartiallyDirectedGraph c = g.skeleton();
    for (const auto& [u, w, v] : immoralities(g)) {
        if (c.has_undirected(u, v)) c.orient(u, v);
        if (c.has_undirected(w, v)) c.orient(w, v);
    }
    return apply_meek(c);
}

/**
 * One member DAG of the equivalence class represented by a CPDAG.
 *
 * Repeatedly orients the lexicographically smallest undirected edge
 * low-index -> high-index and re-closes with Meek's rules, which for a
 * valid CPDAG always completes to a DAG in the class. Malformed inputs
 * (no consistent extension) surface as an error.
 */
inline PartiallyDirectedGraph consistent_extension(const PartiallyDirectedGraph& g) {
    PartiallyDirectedGraph h(0);
    try {
        h = apply_meek(g);
        for (;;) {
            const auto und = h.undirected_edges();
            if (und.empty()) break;
            h.orient(und.front().first, und.front().second);
            h = apply_meek(h);
        }
    } catch (const argument_error&) {
        throw argument_error("consistent_extension: graph has no consistent extension");
    }
    return h;
}

} // namespace mecip
