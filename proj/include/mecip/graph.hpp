#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mecip/errors.hpp"

namespace mecip {

/**
 * A mixed graph over nodes 0..n-1 holding directed and undirected edges.
 *
 * One type specializes to the undirected graph (no directed edges), the
 * DAG (no undirected edges, no directed cycle) and the CPDAG (closed
 * under the orientation rules) used throughout the pipeline. Enforced on
 * mutation: no self-loops, and a pair never mixes directed with
 * undirected. In the pipeline's graph modes u->v and v->u also never
 * coexist; antiparallel pairs only appear in candidate digraphs handed
 * to cycle detection.
 */
class PartiallyDirectedGraph {
public:
    PartiallyDirectedGraph() = default;

    explicit PartiallyDirectedGraph(int n) : n_(n) {
        if (n < 0) throw argument_error("graph: negative node count");
        a_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    }

    static PartiallyDirectedGraph complete_undirected(int n) {
        PartiallyDirectedGraph g(n);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) g.add_undirected(u, v);
        return g;
    }

    int node_count() const { return n_; }

    bool has_directed(int u, int v) const { return cell(u, v) == kDirected; }
    bool has_undirected(int u, int v) const { return cell(u, v) == kUndirected; }
    bool adjacent(int u, int v) const { return cell(u, v) != 0 || cell(v, u) != 0; }

    // Antiparallel directed pairs (u->v plus v->u) are representable so
    // that cycle detection can inspect candidate digraphs; the DAG, UG and
    // CPDAG modes produced by the pipeline never contain them.
    void add_directed(int u, int v) {
        check_pair(u, v);
        if (has_undirected(u, v)) throw argument_error("graph: pair carries an undirected edge");
        if (has_directed(u, v)) throw argument_error("graph: edge already present");
        cell(u, v) = kDirected;
    }

    void add_undirected(int u, int v) {
        check_pair(u, v);
        if (adjacent(u, v)) throw argument_error("graph: pair already carries an edge");
        cell(u, v) = kUndirected;
        cell(v, u) = kUndirected;
    }

    // Removes whatever the pair carries (both directions).
    void remove_edge(int u, int v) {
        check_pair(u, v);
        cell(u, v) = 0;
        cell(v, u) = 0;
    }

    // Turns the undirected edge {u,v} into u->v.
    void orient(int u, int v) {
        check_pair(u, v);
        if (!has_undirected(u, v)) throw argument_error("graph: orient needs an undirected edge");
        cell(u, v) = kDirected;
        cell(v, u) = 0;
    }

    std::vector<int> parents(int v) const {
        std::vector<int> out;
        for (int u = 0; u < n_; ++u)
            if (has_directed(u, v)) out.push_back(u);
        return out;
    }

    std::vector<int> children(int u) const {
        std::vector<int> out;
        for (int v = 0; v < n_; ++v)
            if (has_directed(u, v)) out.push_back(v);
        return out;
    }

    std::vector<int> undirected_neighbors(int v) const {
        std::vector<int> out;
        for (int u = 0; u < n_; ++u)
            if (has_undirected(v, u)) out.push_back(u);
        return out;
    }

    std::vector<int> skeleton_neighbors(int v) const {
        std::vector<int> out;
        for (int u = 0; u < n_; ++u)
            if (u != v && adjacent(v, u)) out.push_back(u);
        return out;
    }

    std::vector<std::pair<int, int>> directed_edges() const {
        std::vector<std::pair<int, int>> out;
        for (int u = 0; u < n_; ++u)
            for (int v = 0; v < n_; ++v)
                if (has_directed(u, v)) out.emplace_back(u, v);
        return out;
    }

    std::vector<std::pair<int, int>> undirected_edges() const {
        std::vector<std::pair<int, int>> out;
        for (int u = 0; u < n_; ++u)
            for (int v = u + 1; v < n_; ++v)
                if (has_undirected(u, v)) out.emplace_back(u, v);
        return out;
    }

    int directed_edge_count() const {
        int k = 0;
        for (int u = 0; u < n_; ++u)
            for (int v = 0; v < n_; ++v) k += has_directed(u, v) ? 1 : 0;
        return k;
    }

    int undirected_edge_count() const {
        int k = 0;
        for (int u = 0; u < n_; ++u)
            for (int v = u + 1; v < n_; ++v) k += has_undirected(u, v) ? 1 : 0;
        return k;
    }

    int edge_count() const { return directed_edge_count() + undirected_edge_count(); }

    bool has_undirected_edges() const {
        for (int u = 0; u < n_; ++u)
            for (int v = u + 1; v < n_; ++v)
                if (has_undirected(u, v)) return true;
        return false;
    }

    // Drops every orientation.
    PartiallyDirectedGraph skeleton() const {
        PartiallyDirectedGraph g(n_);
        for (int u = 0; u < n_; ++u)
            for (int v = u + 1; v < n_; ++v)
                if (adjacent(u, v)) g.add_undirected(u, v);
        return g;
    }

    bool operator==(const PartiallyDirectedGraph& o) const = default;

private:
    static constexpr std::uint8_t kDirected = 1;
    static constexpr std::uint8_t kUndirected = 2;

    std::uint8_t cell(int u, int v) const {
        return a_[static_cast<std::size_t>(u) * n_ + static_cast<std::size_t>(v)];
    }
    std::uint8_t& cell(int u, int v) {
        return a_[static_cast<std::size_t>(u) * n_ + static_cast<std::size_t>(v)];
    }

    void check_pair(int u, int v) const {
        if (u < 0 || v < 0 || u >= n_ || v >= n_)
            throw argument_error("graph: node index out of range");
        if (u == v) throw argument_error("graph: self-loops are not allowed");
    }

    int n_ = 0;
    std::vector<std::uint8_t> a_;
};

// True iff the directed part contains no cycle (undirected edges ignored).
inline bool directed_part_acyclic(const PartiallyDirectedGraph& g) {
    const int n = g.node_count();
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (auto [u, v] : g.directed_edges()) indeg[static_cast<std::size_t>(v)]++;
    std::vector<int> stack;
    for (int v = 0; v < n; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
    int seen = 0;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++seen;
        for (int c : g.children(v))
            if (--indeg[static_cast<std::size_t>(c)] == 0) stack.push_back(c);
    }
    return seen == n;
}

inline bool is_dag(const PartiallyDirectedGraph& g) {
    return !g.has_undirected_edges() && directed_part_acyclic(g);
}

inline void require_dag(const PartiallyDirectedGraph& g, const char* who) {
    if (g.has_undirected_edges())
        throw argument_error(std::string(who) + ": graph has undirected edges");
    if (!directed_part_acyclic(g))
        throw argument_error(std::string(who) + ": graph has a directed cycle");
}

// Deterministic topological order (smallest available index first).
inline std::vector<int> topological_order(const PartiallyDirectedGraph& g) {
    require_dag(g, "topological_order");
    const int n = g.node_count();
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (auto [u, v] : g.directed_edges()) indeg[static_cast<std::size_t>(v)]++;
    std::vector<char> emitted(static_cast<std::size_t>(n), 0);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(order.size()) < n) {
        for (int v = 0; v < n; ++v) {
            if (!emitted[static_cast<std::size_t>(v)] && indeg[static_cast<std::size_t>(v)] == 0) {
                emitted[static_cast<std::size_t>(v)] = 1;
                order.push_back(v);
                for (int c : g.children(v)) indeg[static_cast<std::size_t>(c)]--;
                break;
            }
        }
    }
    return order;
}

// All nodes with a directed path to some node in `from` (excluding `from`
// itself unless reachable).
inline std::vector<char> ancestor_mask(const PartiallyDirectedGraph& g, const std::vector<int>& from) {
    const int n = g.node_count();
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    std::vector<int> stack = from;
    for (int v : from) mask[static_cast<std::size_t>(v)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int p : g.parents(v)) {
            if (!mask[static_cast<std::size_t>(p)]) {
                mask[static_cast<std::size_t>(p)] = 1;
                stack.push_back(p);
            }
        }
    }
    return mask;
}

inline std::vector<char> descendant_mask(const PartiallyDirectedGraph& g, int from) {
    const int n = g.node_count();
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{from};
    mask[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int c : g.children(v)) {
            if (!mask[static_cast<std::size_t>(c)]) {
                mask[static_cast<std::size_t>(c)] = 1;
                stack.push_back(c);
            }
        }
    }
    return mask;
}

namespace detail {

// Johnson-style elementary circuit enumeration restricted to one strongly
// connected component. Recursion depth is bounded by the node count.
class CircuitSearch {
public:
    CircuitSearch(const std::vector<std::vector<int>>& adj, const std::vector<char>& in_comp,
                  int root, std::size_t limit, std::vector<std::vector<int>>& out)
        : adj_(adj), in_comp_(in_comp), root_(root), limit_(limit), out_(out) {
        const std::size_t n = adj.size();
        blocked_.assign(n, 0);
        blist_.assign(n, {});
    }

    bool run() { // returns false when the global limit was reached
        circuit(root_);
        return !aborted_;
    }

private:
    // Returns true when some circuit extends through v; sets aborted_ when
    // the output limit is hit.
    bool circuit(int v) {
        bool found = false;
        path_.push_back(v);
        blocked_[static_cast<std::size_t>(v)] = 1;
        for (int w : adj_[static_cast<std::size_t>(v)]) {
            if (aborted_) break;
            if (!in_comp_[static_cast<std::size_t>(w)] || w < root_) continue;
            if (w == root_) {
                out_.push_back(path_);
                found = true;
                if (out_.size() >= limit_) {
                    aborted_ = true;
                    break;
                }
            } else if (!blocked_[static_cast<std::size_t>(w)]) {
                if (circuit(w)) found = true;
            }
        }
        if (found) {
            unblock(v);
        } else {
            for (int w : adj_[static_cast<std::size_t>(v)]) {
                if (!in_comp_[static_cast<std::size_t>(w)] || w < root_) continue;
                auto& bl = blist_[static_cast<std::size_t>(w)];
                if (std::find(bl.begin(), bl.end(), v) == bl.end()) bl.push_back(v);
            }
        }
        path_.pop_back();
        return found;
    }

    void unblock(int v) {
        blocked_[static_cast<std::size_t>(v)] = 0;
        auto& bl = blist_[static_cast<std::size_t>(v)];
        while (!bl.empty()) {
            const int w = bl.back();
            bl.pop_back();
            if (blocked_[static_cast<std::size_t>(w)]) unblock(w);
        }
    }

    const std::vector<std::vector<int>>& adj_;
    const std::vector<char>& in_comp_;
    int root_;
    std::size_t limit_;
    std::vector<std::vector<int>>& out_;
    std::vector<char> blocked_;
    std::vector<std::vector<int>> blist_;
    std::vector<int> path_;
    bool aborted_ = false;
};

// Tarjan strongly connected components of the subgraph induced by nodes
// >= lo. Returns component ids; -1 for excluded nodes.
inline std::vector<int> scc_from(const std::vector<std::vector<int>>& adj, int lo,
                                 int& component_count) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> comp(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
        num(static_cast<std::size_t>(n), -1);
    std::vector<int> stack;
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    int counter = 0;
    component_count = 0;

    // Explicit DFS stack to avoid deep recursion on long chains.
    struct Frame {
        int v;
        std::size_t edge;
    };
    for (int start = lo; start < n; ++start) {
        if (num[static_cast<std::size_t>(start)] != -1) continue;
        std::vector<Frame> frames{{start, 0}};
        num[static_cast<std::size_t>(start)] = low[static_cast<std::size_t>(start)] = counter++;
        stack.push_back(start);
        on_stack[static_cast<std::size_t>(start)] = 1;
        while (!frames.empty()) {
            auto& f = frames.back();
            const auto& edges = adj[static_cast<std::size_t>(f.v)];
            bool descended = false;
            while (f.edge < edges.size()) {
                const int w = edges[f.edge++];
                if (w < lo) continue;
                if (num[static_cast<std::size_t>(w)] == -1) {
                    num[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = counter++;
                    stack.push_back(w);
                    on_stack[static_cast<std::size_t>(w)] = 1;
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[static_cast<std::size_t>(w)])
                    low[static_cast<std::size_t>(f.v)] =
                        std::min(low[static_cast<std::size_t>(f.v)], num[static_cast<std::size_t>(w)]);
            }
            if (descended) continue;
            if (low[static_cast<std::size_t>(f.v)] == num[static_cast<std::size_t>(f.v)]) {
                for (;;) {
                    const int w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = 0;
                    comp[static_cast<std::size_t>(w)] = component_count;
                    if (w == f.v) break;
                }
                ++component_count;
            }
            const int v = f.v;
            frames.pop_back();
            if (!frames.empty())
                low[static_cast<std::size_t>(frames.back().v)] =
                    std::min(low[static_cast<std::size_t>(frames.back().v)],
                             low[static_cast<std::size_t>(v)]);
        }
    }
    return comp;
}

} // namespace detail

/**
 * Enumerates up to `limit` elementary directed cycles, each returned as an
 * ordered node list starting at its smallest node. Johnson's scheme: scan
 * candidate roots in ascending order, restrict to the strongly connected
 * component of the least remaining vertex, and run the blocked search
 * inside it. Output order is deterministic.
 */
inline std::vector<std::vector<int>> enumerate_cycles(const PartiallyDirectedGraph& g,
                                                      std::size_t limit = SIZE_MAX) {
    if (g.has_undirected_edges())
        throw argument_error("enumerate_cycles: graph has undirected edges");
    std::vector<std::vector<int>> out;
    const int n = g.node_count();
    if (limit == 0 || n == 0) return out;

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (auto [u, v] : g.directed_edges()) adj[static_cast<std::size_t>(u)].push_back(v);

    int s = 0;
    while (s < n) {
        int ncomp = 0;
        const auto comp = detail::scc_from(adj, s, ncomp);
        std::vector<int> comp_size(static_cast<std::size_t>(ncomp), 0);
        std::vector<int> comp_min(static_cast<std::size_t>(ncomp), n);
        for (int v = s; v < n; ++v) {
            const int c = comp[static_cast<std::size_t>(v)];
            comp_size[static_cast<std::size_t>(c)]++;
            comp_min[static_cast<std::size_t>(c)] = std::min(comp_min[static_cast<std::size_t>(c)], v);
        }
        int best_comp = -1, best_root = n;
        for (int c = 0; c < ncomp; ++c) {
            if (comp_size[static_cast<std::size_t>(c)] >= 2 &&
                comp_min[static_cast<std::size_t>(c)] < best_root) {
                best_root = comp_min[static_cast<std::size_t>(c)];
                best_comp = c;
            }
        }
        if (best_comp < 0) break;
        std::vector<char> in_comp(static_cast<std::size_t>(n), 0);
        for (int v = s; v < n; ++v)
            if (comp[static_cast<std::size_t>(v)] == best_comp) in_comp[static_cast<std::size_t>(v)] = 1;
        detail::CircuitSearch search(adj, in_comp, best_root, limit, out);
        if (!search.run()) return out; // limit reached
        s = best_root + 1;
    }
    return out;
}

// One elementary directed cycle, or nothing when the graph is acyclic.
inline std::optional<std::vector<int>> find_cycle(const PartiallyDirectedGraph& g) {
    auto cycles = enumerate_cycles(g, 1);
    if (cycles.empty()) return std::nullopt;
    return cycles.front();
}

// --- edge list text format -------------------------------------------------
//
// One edge per line: "u -> v" for directed, "u -- v" for undirected, using
// node names. Lines starting with '#' are comments.

inline void write_edge_list(const PartiallyDirectedGraph& g, const std::vector<std::string>& names,
                            std::ostream& out, const std::vector<std::string>& comments = {}) {
    if (static_cast<int>(names.size()) != g.node_count())
        throw argument_error("write_edge_list: name count mismatch");
    for (const auto& c : comments) out << "# " << c << '\n';
    for (auto [u, v] : g.directed_edges())
        out << names[static_cast<std::size_t>(u)] << " -> " << names[static_cast<std::size_t>(v)]
            << '\n';
    for (auto [u, v] : g.undirected_edges())
        out << names[static_cast<std::size_t>(u)] << " -- " << names[static_cast<std::size_t>(v)]
            << '\n';
}

inline PartiallyDirectedGraph read_edge_list(std::istream& in,
                                             const std::vector<std::string>& names) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
    PartiallyDirectedGraph g(static_cast<int>(names.size()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string a, op, b;
        if (!(ls >> a)) continue;
        if (a[0] == '#') continue;
        if (!(ls >> op >> b) || (op != "->" && op != "--"))
            throw parse_error("edge list line " + std::to_string(lineno) +
                              ": expected 'u -> v' or 'u -- v'");
        std::string extra;
        if (ls >> extra)
            throw parse_error("edge list line " + std::to_string(lineno) + ": trailing tokens");
        const auto ia = index.find(a);
        const auto ib = index.find(b);
        if (ia == index.end() || ib == index.end())
            throw argument_error("edge list line " + std::to_string(lineno) + ": unknown node '" +
                                 (ia == index.end() ? a : b) + "'");
        if (op == "->")
            g.add_directed(ia->second, ib->second);
        else
            g.add_undirected(ia->second, ib->second);
    }
    return g;
}

} // namespace mecip
