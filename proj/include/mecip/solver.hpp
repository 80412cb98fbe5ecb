#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "mecip/dataset.hpp"
#include "mecip/errors.hpp"
#include "mecip/graph.hpp"
#include "mecip/stats.hpp"

namespace mecip {

// One candidate parent set with its local score.
struct ParentSetCandidate {
    std::vector<int> parents; // sorted ascending
    double score = 0.0;
};

/**
 * Per-node candidate parent sets, the input of the structure IP. Every
 * node carries the empty set, candidates are subsets of the node's
 * undirected-graph neighborhood, and enumeration order is by size then
 * lexicographic.
 */
struct ScoreTable {
    std::vector<std::vector<ParentSetCandidate>> per_node;

    int node_count() const { return static_cast<int>(per_node.size()); }

    void validate() const {
        for (const auto& cands : per_node) {
            if (cands.empty() || !cands.front().parents.empty())
                throw argument_error("score table: first candidate of every node must be the empty set");
        }
    }
};

// Accumulated cycle-prevention constraints; each cut is the sorted node
// set of one detected elementary cycle.
struct CutPool {
    std::vector<std::vector<int>> cuts;

    bool add(std::vector<int> cut) {
        std::sort(cut.begin(), cut.end());
        if (cut.size() < 2) throw argument_error("cut pool: a cut needs at least two nodes");
        if (std::adjacent_find(cut.begin(), cut.end()) != cut.end())
            throw argument_error("cut pool: duplicate node in cut");
        if (std::find(cuts.begin(), cuts.end(), cut) != cuts.end()) return false;
        cuts.push_back(std::move(cut));
        return true;
    }

    std::size_t size() const { return cuts.size(); }
};

// One feasible point of the IP: per node, the index of its chosen
// candidate, plus the objective value.
struct Assignment {
    std::vector<int> choice;
    double objective = 0.0;
};

/**
 * Enumerates BIC-scored candidate parent sets for each node: all subsets
 * of the node's UG neighborhood (the empty set included), scored through
 * the shared cache. Nodes whose neighborhood would generate more than
 * `budget` subsets are a hard error unless `max_set_size` caps the subset
 * size; silent truncation would silently change the optimum.
 */
inline ScoreTable build_score_table(const CategoricalDataset& ds, const PartiallyDirectedGraph& ug,
                                    ScoreCache& cache,
                                    std::optional<int> max_set_size = std::nullopt,
                                    std::uint64_t budget = (1ULL << 20)) {
    if (ug.node_count() != ds.n_vars())
        throw argument_error("build_score_table: graph and dataset disagree on variable count");
    if (ug.directed_edge_count() != 0)
        throw argument_error("build_score_table: expected an undirected graph");

    ScoreTable table;
    table.per_node.resize(static_cast<std::size_t>(ds.n_vars()));
    for (int v = 0; v < ds.n_vars(); ++v) {
        const auto nbrs = ug.undirected_neighbors(v);
        const int deg = static_cast<int>(nbrs.size());
        const int cap = max_set_size ? std::min(*max_set_size, deg) : deg;
        if (!max_set_size && (deg >= 63 || (1ULL << deg) > budget))
            throw resource_error("build_score_table: node '" +
                                 ds.names[static_cast<std::size_t>(v)] + "' has " +
                                 std::to_string(deg) +
                                 " neighbors; candidate sets exceed the budget");

        auto& cands = table.per_node[static_cast<std::size_t>(v)];
        for (int size = 0; size <= cap; ++size) {
            // lexicographic combinations of `size` neighbors
            std::vector<int> pick(static_cast<std::size_t>(size));
            for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
            for (;;) {
                std::vector<int> parents(static_cast<std::size_t>(size));
                for (int i = 0; i < size; ++i)
                    parents[static_cast<std::size_t>(i)] =
                        nbrs[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
                cands.push_back({parents, cache.score(v, parents)});
                if (size == 0) break;
                int i = size - 1;
                while (i >= 0 && pick[static_cast<std::size_t>(i)] == deg - size + i) --i;
                if (i < 0) break;
                ++pick[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < size; ++j)
                    pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    }
    table.validate();
    return table;
}

namespace detail {

inline bool disjoint_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (a[i] > b[j])
            ++j;
        else
            return false;
    }
    return true;
}

} // namespace detail

namespace detail {

// State key for the solver's memoization: one bit per open cut.
struct CutState {
    std::vector<std::uint64_t> words;
    bool operator==(const CutState&) const = default;
};
struct CutStateHash {
    std::size_t operator()(const CutState& s) const {
        std::uint64_t h = 1469598103934665603ULL;
        for (std::uint64_t w : s.words) {
            h ^= w;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

} // namespace detail

/**
 * Exact maximization of the parent-set selection IP:
 *
 *   max  sum_v score(v, S_v)
 *   s.t. one candidate per node; for every cut C at least one node of C
 *        picks a parent set disjoint from C.
 *
 * Depth-first search over nodes in index order with full memoization:
 * because scores are separable, the optimal completion from node v
 * depends only on which cuts spanning v are still unsatisfied, so
 * subproblems are keyed by (v, open-cut state) and solved once. The empty
 * set satisfies every cut, hence the program is always feasible. Ties
 * between equal-scoring candidates resolve to the smaller set index, so
 * the result is deterministic.
 */
inline Assignment solve_ip(const ScoreTable& table, const CutPool& cuts) {
    table.validate();
    const int n = table.node_count();
    const std::size_t m = cuts.cuts.size();

    // open_at[v]: cuts with min member < v <= max member, i.e. partially
    // assigned when node v is about to be chosen. Bit i of a state at
    // depth v refers to open_at[v][i]; set means "not yet satisfied".
    std::vector<std::vector<int>> open_at(static_cast<std::size_t>(n) + 1);
    for (std::size_t ci = 0; ci < m; ++ci) {
        const auto& cut = cuts.cuts[ci];
        for (int v = cut.front() + 1; v <= cut.back(); ++v)
            open_at[static_cast<std::size_t>(v)].push_back(static_cast<int>(ci));
    }
    std::vector<std::vector<char>> member(m);
    for (std::size_t ci = 0; ci < m; ++ci) {
        member[ci].assign(static_cast<std::size_t>(n), 0);
        for (int v : cuts.cuts[ci]) member[ci][static_cast<std::size_t>(v)] = 1;
    }

    struct Entry {
        double value;
        int choice;
    };
    std::vector<std::unordered_map<detail::CutState, Entry, detail::CutStateHash>> memo(
        static_cast<std::size_t>(n) + 1);

    auto state_bit = [](const detail::CutState& s, std::size_t i) {
        return (s.words[i / 64] >> (i % 64)) & 1ULL;
    };

    // Child state when node v picks candidate `cand`, or nullopt when a cut
    // closing at v ends up unsatisfied.
    auto transition = [&](int v, const detail::CutState& state,
                          const ParentSetCandidate& cand) -> std::optional<detail::CutState> {
        const auto& open_here = open_at[static_cast<std::size_t>(v)];
        const auto& open_next = open_at[static_cast<std::size_t>(v) + 1];
        auto unsat_before = [&](int ci) {
            const auto pos = std::lower_bound(open_here.begin(), open_here.end(), ci);
            if (pos != open_here.end() && *pos == ci)
                return state_bit(state, static_cast<std::size_t>(pos - open_here.begin())) != 0;
            return true; // first member: untouched so far
        };
        auto satisfied_by_v = [&](int ci) {
            return member[static_cast<std::size_t>(ci)][static_cast<std::size_t>(v)] &&
                   detail::disjoint_sorted(cand.parents, cuts.cuts[static_cast<std::size_t>(ci)]);
        };
        // cuts whose last member is v must be satisfied now
        for (int ci : open_here)
            if (cuts.cuts[static_cast<std::size_t>(ci)].back() == v && unsat_before(ci) &&
                !satisfied_by_v(ci))
                return std::nullopt;
        detail::CutState child;
        child.words.assign((open_next.size() + 63) / 64, 0);
        for (std::size_t i = 0; i < open_next.size(); ++i) {
            const int ci = open_next[i];
            if (unsat_before(ci) && !satisfied_by_v(ci)) child.words[i / 64] |= 1ULL << (i % 64);
        }
        return child;
    };

    // Iterative evaluation via an explicit stack of pending subproblems.
    struct Pending {
        int v;
        detail::CutState state;
    };
    std::vector<Pending> stack;
    detail::CutState root;
    memo[static_cast<std::size_t>(n)].emplace(detail::CutState{}, Entry{0.0, -1});
    stack.push_back({0, root});
    while (!stack.empty()) {
        const auto [v, state] = stack.back();
        if (memo[static_cast<std::size_t>(v)].count(state)) {
            stack.pop_back();
            continue;
        }
        const auto& cands = table.per_node[static_cast<std::size_t>(v)];
        bool ready = true;
        double best = 0.0;
        int best_choice = -1;
        for (std::size_t s = 0; s < cands.size(); ++s) {
            const auto child = transition(v, state, cands[s]);
            if (!child) continue;
            const auto it = memo[static_cast<std::size_t>(v) + 1].find(*child);
            if (it == memo[static_cast<std::size_t>(v) + 1].end()) {
                stack.push_back({v + 1, *child});
                ready = false;
                continue;
            }
            if (ready) {
                const double value = cands[s].score + it->second.value;
                if (best_choice < 0 || value > best) {
                    best = value;
                    best_choice = static_cast<int>(s);
                }
            }
        }
        if (ready) {
            if (best_choice < 0)
                throw error("solve_ip: infeasible subproblem; empty parent sets should make this impossible");
            memo[static_cast<std::size_t>(v)].emplace(state, Entry{best, best_choice});
            stack.pop_back();
        }
    }

    Assignment result;
    detail::CutState state;
    double objective = 0.0;
    for (int v = 0; v < n; ++v) {
        const auto& entry = memo[static_cast<std::size_t>(v)].at(state);
        result.choice.push_back(entry.choice);
        objective += table.per_node[static_cast<std::size_t>(v)]
                         [static_cast<std::size_t>(entry.choice)]
                             .score;
        state = *transition(v, state,
                            table.per_node[static_cast<std::size_t>(v)]
                                [static_cast<std::size_t>(entry.choice)]);
    }
    result.objective = objective;
    return result;
}

// The DAG induced by an assignment: an edge p -> v for every chosen parent.
inline PartiallyDirectedGraph assignment_graph(const ScoreTable& table, const Assignment& a) {
    PartiallyDirectedGraph g(table.node_count());
    for (int v = 0; v < table.node_count(); ++v)
        for (int p : table.per_node[static_cast<std::size_t>(v)]
                 [static_cast<std::size_t>(a.choice[static_cast<std::size_t>(v)])]
                     .parents)
            g.add_directed(p, v);
    return g;
}

struct SolveResult {
    PartiallyDirectedGraph dag;
    double objective = 0.0;
    int rounds = 0;
    CutPool pool;
    Assignment assignment;
};

/**
 * The cutting-plane loop: solve the IP, enumerate elementary cycles of the
 * chosen structure (up to `cycles_per_round` at a time), add each as a
 * cut, and re-solve until the optimum is acyclic. Cuts only ever exclude
 * cyclic assignments, so the final DAG is optimal among acyclic ones.
 */
inline SolveResult solve_to_acyclic(const ScoreTable& table, int max_rounds = 10000,
                                    std::size_t cycles_per_round = 100) {
    SolveResult result;
    for (int round = 1; round <= max_rounds; ++round) {
        result.assignment = solve_ip(table, result.pool);
        result.dag = assignment_graph(table, result.assignment);
        result.objective = result.assignment.objective;
        result.rounds = round;
        const auto cycles = enumerate_cycles(result.dag, cycles_per_round);
        if (cycles.empty()) return result;
        for (const auto& cycle : cycles) result.pool.add(cycle);
    }
    throw resource_error("solve_to_acyclic: cut generation exceeded " +
                         std::to_string(max_rounds) + " rounds");
}

// Plain-text listing of the model (scores and cuts) for cross-checking
// against an external MIP solver by hand.
inline void dump_model(const ScoreTable& table, const CutPool& cuts, std::ostream& out) {
    out << "maximize sum of chosen scores; one parent set per node\n";
    for (int v = 0; v < table.node_count(); ++v) {
        for (std::size_t s = 0; s < table.per_node[static_cast<std::size_t>(v)].size(); ++s) {
            const auto& c = table.per_node[static_cast<std::size_t>(v)][s];
            out << "x[" << v << "," << s << "] parents={";
            for (std::size_t i = 0; i < c.parents.size(); ++i) {
                if (i) out << ",";
                out << c.parents[i];
            }
            out << "} score=" << c.score << "\n";
        }
    }
    for (const auto& cut : cuts.cuts) {
        out << "cut {";
        for (std::size_t i = 0; i < cut.size(); ++i) {
            if (i) out << ",";
            out << cut[i];
        }
        out << "}: some member chooses parents disjoint from the set\n";
    }
}

} // namespace mecip
