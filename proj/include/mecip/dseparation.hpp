#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "mecip/errors.hpp"
#include "mecip/graph.hpp"

namespace mecip {

/**
 * d-separation of x and y given z in a DAG.
 *
 * Contract: true iff every undirected path between x and y is blocked —
 * a non-collider node blocks when it is in z, a collider blocks unless it
 * or one of its descendants is in z. Implemented as the linear-time
 * active-trail reachability over (node, arrival direction) states rather
 * than path enumeration.
 */
inline bool d_separated(const PartiallyDirectedGraph& g, int x, int y,
                        const std::vector<int>& z) {
    require_dag(g, "d_separated");
    const int n = g.node_count();
    auto check_index = [&](int v) {
        if (v < 0 || v >= n) throw argument_error("d_separated: node index out of range");
    };
    check_index(x);
    check_index(y);
    if (x == y) throw argument_error("d_separated: x and y must differ");
    std::vector<char> in_z(static_cast<std::size_t>(n), 0);
    for (int v : z) {
        check_index(v);
        if (v == x || v == y) throw argument_error("d_separated: conditioning set contains x or y");
        in_z[static_cast<std::size_t>(v)] = 1;
    }

    // opens_collider[v]: v or some descendant of v lies in z.
    std::vector<char> opens_collider(static_cast<std::size_t>(n), 0);
    {
        std::vector<int> stack;
        for (int v = 0; v < n; ++v)
            if (in_z[static_cast<std::size_t>(v)]) {
                opens_collider[static_cast<std::size_t>(v)] = 1;
                stack.push_back(v);
            }
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int p : g.parents(v))
                if (!opens_collider[static_cast<std::size_t>(p)]) {
                    opens_collider[static_cast<std::size_t>(p)] = 1;
                    stack.push_back(p);
                }
        }
    }

    // State encoding: 2*v + 0 = arrived along an edge out of v (from a
    // child), 2*v + 1 = arrived along an edge into v (from a parent).
    std::vector<char> visited(static_cast<std::size_t>(2 * n), 0);
    std::deque<int> queue;
    auto push = [&](int state) {
        if (!visited[static_cast<std::size_t>(state)]) {
            visited[static_cast<std::size_t>(state)] = 1;
            queue.push_back(state);
        }
    };
    push(2 * x); // leaving x is unconstrained; x is never in z

    while (!queue.empty()) {
        const int state = queue.front();
        queue.pop_front();
        const int v = state / 2;
        const bool from_parent = (state % 2) == 1;
        if (v == y) return false;
        if (!from_parent) {
            if (!in_z[static_cast<std::size_t>(v)]) {
                for (int p : g.parents(v)) push(2 * p);
                for (int c : g.children(v)) push(2 * c + 1);
            }
        } else {
            if (!in_z[static_cast<std::size_t>(v)])
                for (int c : g.children(v)) push(2 * c + 1);
            if (opens_collider[static_cast<std::size_t>(v)])
                for (int p : g.parents(v)) push(2 * p);
        }
    }
    return true;
}

namespace detail {

// Unit-capacity max flow specialised for vertex cuts: each vertex v of the
// moral graph is split into v_in -> v_out with capacity 1; undirected moral
// edges become infinite arcs out(u) -> in(v) and out(v) -> in(u).
class VertexCutNetwork {
public:
    VertexCutNetwork(int n) : n_(n), head_(static_cast<std::size_t>(2 * n)) {}

    static int in_node(int v) { return 2 * v; }
    static int out_node(int v) { return 2 * v + 1; }

    void add_arc(int from, int to, int cap) {
        head_[static_cast<std::size_t>(from)].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({to, cap});
        head_[static_cast<std::size_t>(to)].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({from, 0});
    }

    int max_flow(int source, int sink) {
        int flow = 0;
        for (;;) {
            std::vector<int> prev_arc(static_cast<std::size_t>(2 * n_), -1);
            std::deque<int> queue{source};
            prev_arc[static_cast<std::size_t>(source)] = -2;
            bool reached = false;
            while (!queue.empty() && !reached) {
                const int v = queue.front();
                queue.pop_front();
                for (int a : head_[static_cast<std::size_t>(v)]) {
                    const auto& arc = arcs_[static_cast<std::size_t>(a)];
                    if (arc.cap > 0 && prev_arc[static_cast<std::size_t>(arc.to)] == -1) {
                        prev_arc[static_cast<std::size_t>(arc.to)] = a;
                        if (arc.to == sink) {
                            reached = true;
                            break;
                        }
                        queue.push_back(arc.to);
                    }
                }
            }
            if (!reached) return flow;
            for (int v = sink; v != source;) {
                const int a = prev_arc[static_cast<std::size_t>(v)];
                arcs_[static_cast<std::size_t>(a)].cap -= 1;
                arcs_[static_cast<std::size_t>(a ^ 1)].cap += 1;
                v = arcs_[static_cast<std::size_t>(a ^ 1)].to;
            }
            ++flow;
        }
    }

private:
    struct Arc {
        int to;
        int cap;
    };
    int n_;
    std::vector<std::vector<int>> head_;
    std::vector<Arc> arcs_;
};

struct MoralContext {
    std::vector<int> nodes;                 // ancestral set, ascending
    std::vector<std::vector<char>> adj;     // moral adjacency over local ids
    int a_local = -1, b_local = -1;
};

inline MoralContext moral_ancestral_graph(const PartiallyDirectedGraph& g, int a, int b) {
    const auto mask = ancestor_mask(g, {a, b});
    MoralContext ctx;
    const int n = g.node_count();
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        if (mask[static_cast<std::size_t>(v)]) {
            local[static_cast<std::size_t>(v)] = static_cast<int>(ctx.nodes.size());
            ctx.nodes.push_back(v);
        }
    const int m = static_cast<int>(ctx.nodes.size());
    ctx.adj.assign(static_cast<std::size_t>(m), std::vector<char>(static_cast<std::size_t>(m), 0));
    auto link = [&](int u, int v) {
        const int lu = local[static_cast<std::size_t>(u)];
        const int lv = local[static_cast<std::size_t>(v)];
        if (lu >= 0 && lv >= 0 && lu != lv) {
            ctx.adj[static_cast<std::size_t>(lu)][static_cast<std::size_t>(lv)] = 1;
            ctx.adj[static_cast<std::size_t>(lv)][static_cast<std::size_t>(lu)] = 1;
        }
    };
    for (auto [u, v] : g.directed_edges()) link(u, v);
    // marry parents of every common child inside the ancestral set
    for (int w = 0; w < n; ++w) {
        if (!mask[static_cast<std::size_t>(w)]) continue;
        const auto ps = g.parents(w);
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j) link(ps[i], ps[j]);
    }
    ctx.a_local = local[static_cast<std::size_t>(a)];
    ctx.b_local = local[static_cast<std::size_t>(b)];
    return ctx;
}

// Size of the minimum vertex cut between a and b in the moral graph,
// with the vertices in `removed` deleted outright.
inline int min_cut_size(const MoralContext& ctx, const std::vector<char>& removed) {
    const int m = static_cast<int>(ctx.nodes.size());
    VertexCutNetwork net(m);
    for (int v = 0; v < m; ++v) {
        if (removed[static_cast<std::size_t>(v)]) continue;
        const int cap = (v == ctx.a_local || v == ctx.b_local) ? m + 1 : 1;
        net.add_arc(VertexCutNetwork::in_node(v), VertexCutNetwork::out_node(v), cap);
    }
    for (int u = 0; u < m; ++u) {
        if (removed[static_cast<std::size_t>(u)]) continue;
        for (int v = u + 1; v < m; ++v) {
            if (removed[static_cast<std::size_t>(v)]) continue;
            if (!ctx.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) continue;
            net.add_arc(VertexCutNetwork::out_node(u), VertexCutNetwork::in_node(v), m + 1);
            net.add_arc(VertexCutNetwork::out_node(v), VertexCutNetwork::in_node(u), m + 1);
        }
    }
    return net.max_flow(VertexCutNetwork::out_node(ctx.a_local),
                        VertexCutNetwork::in_node(ctx.b_local));
}

} // namespace detail

/**
 * A minimum-cardinality d-separating set for a non-adjacent pair, or
 * nothing when no separator exists.
 *
 * Classical reduction: separators within the ancestral set correspond to
 * vertex cuts of the moralized ancestral graph, and the minimum over all
 * separators is attained there. Ties among minimum cuts are broken toward
 * the lexicographically smallest node-index set by greedy extension with
 * an exact residual-cut feasibility check.
 */
inline std::optional<std::vector<int>> min_d_separator(const PartiallyDirectedGraph& g, int a,
                                                       int b) {
    require_dag(g, "min_d_separator");
    const int n = g.node_count();
    if (a < 0 || b < 0 || a >= n || b >= n)
        throw argument_error("min_d_separator: node index out of range");
    if (a == b) throw argument_error("min_d_separator: nodes must differ");
    if (g.adjacent(a, b)) throw argument_error("min_d_separator: nodes are adjacent");

    const auto ctx = detail::moral_ancestral_graph(g, a, b);
    if (ctx.adj[static_cast<std::size_t>(ctx.a_local)][static_cast<std::size_t>(ctx.b_local)])
        return std::nullopt; // moral adjacency: not separable

    const int m = static_cast<int>(ctx.nodes.size());
    std::vector<char> removed(static_cast<std::size_t>(m), 0);
    const int k = detail::min_cut_size(ctx, removed);
    std::vector<int> cut;
    int chosen = 0;
    for (int v = 0; v < m && chosen < k; ++v) {
        if (v == ctx.a_local || v == ctx.b_local) continue;
        removed[static_cast<std::size_t>(v)] = 1;
        if (chosen + 1 + detail::min_cut_size(ctx, removed) <= k) {
            cut.push_back(ctx.nodes[static_cast<std::size_t>(v)]);
            ++chosen;
        } else {
            removed[static_cast<std::size_t>(v)] = 0;
        }
    }
    return cut; // ctx.nodes ascending, so the result is sorted
}

} // namespace mecip
