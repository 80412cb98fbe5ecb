#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mecip/bayesnet.hpp"
#include "mecip/cpdag.hpp"
#include "mecip/dataset.hpp"
#include "mecip/dseparation.hpp"
#include "mecip/emsg.hpp"
#include "mecip/errors.hpp"
#include "mecip/graph.hpp"
#include "mecip/solver.hpp"
#include "mecip/stats.hpp"

namespace mecip {

struct LearnConfig {
    double alpha = 0.05;               // significance threshold
    int max_rounds = 50;               // triangulation iteration cap
    std::uint64_t candidate_budget = 1ULL << 20; // parent-set budget per node
    std::optional<int> max_parent_set_size;      // explicit cap; lifts the budget error
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw argument_error("config: alpha must lie in (0,1)");
        if (max_rounds < 1) throw argument_error("config: max_rounds must be >= 1");
    }
};

struct PhaseTimes {
    double pairwise = 0.0;
    double emsg = 0.0;
    double score_table = 0.0;
    double solve = 0.0;
    double triangulation = 0.0;
    double total = 0.0;
};

struct LearnResult {
    std::string algorithm;
    PartiallyDirectedGraph cpdag;
    double bic = 0.0;
    int rounds = 0;                 // triangulation passes (mecip) / moves (hc)
    std::vector<int> edges_added;   // per triangulation round
    PhaseTimes elapsed;
};

// Skeleton-level agreement with a ground-truth network. Both percentages
// are relative to the true edge count; orientation is deliberately
// ignored since only the equivalence class is identifiable.
struct StructMetrics {
    double missing_pct = 0.0;
    double extra_pct = 0.0;
    int n_true_edges = 0;
    int n_learned_edges = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PairSeparatorKey {
    int a, b;
    std::vector<int> z;
    bool operator==(const PairSeparatorKey&) const = default;
};
struct PairSeparatorKeyHash {
    std::size_t operator()(const PairSeparatorKey& k) const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ULL;
        };
        mix(static_cast<std::uint64_t>(k.a) + 1);
        mix(static_cast<std::uint64_t>(k.b) + 1);
        for (int z : k.z) mix(static_cast<std::uint64_t>(z) + 2);
        return static_cast<std::size_t>(h);
    }
};

} // namespace detail

using TestedPairCache =
    std::unordered_set<detail::PairSeparatorKey, detail::PairSeparatorKeyHash>;

/**
 * One triangulation sweep.
 *
 * Every pair that is non-adjacent in the CPDAG skeleton but shares at
 * least one skeleton neighbor is tested for conditional dependence given
 * a minimum d-separating set, computed on one fixed consistent extension
 * of the CPDAG (valid because d-separation is invariant across the
 * equivalence class). Dependent pairs (p <= alpha) gain an undirected
 * edge in the working UG. The (pair, separator) cache suppresses exact
 * repeat tests across rounds; a pair can only be re-tested under a
 * genuinely different separator. Returns the number of edges added.
 */
inline int triangulation_pass(const CategoricalDataset& ds, const PartiallyDirectedGraph& cpdag,
                              PartiallyDirectedGraph& ug, const LearnConfig& cfg,
                              TestedPairCache& tested) {
    cfg.validate();
    const int n = cpdag.node_count();
    const auto extension = consistent_extension(cpdag);
    int added = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (cpdag.adjacent(a, b)) continue;
            bool share_neighbor = false;
            for (int c = 0; c < n && !share_neighbor; ++c)
                share_neighbor = c != a && c != b && cpdag.adjacent(a, c) && cpdag.adjacent(b, c);
            if (!share_neighbor) continue;
            const auto sep = min_d_separator(extension, a, b);
            if (!sep) continue; // structurally dependent already; nothing to test
            detail::PairSeparatorKey key{a, b, *sep};
            if (!tested.insert(std::move(key)).second) continue;
            const auto res = chi_sq_test(contingency(ds, a, b, *sep));
            if (res.p_value <= cfg.alpha && !ug.has_undirected(a, b)) {
                ug.add_undirected(a, b);
                ++added;
            }
        }
    }
    return added;
}

/**
 * The full MEC-IP pipeline.
 *
 * Phase order: marginal chi-squared tests for all pairs; EMSG pruning of
 * the complete graph; significance filtering to the initial UG; exact
 * parent-set IP restricted to UG neighborhoods with cycle cuts; CPDAG
 * construction. Then triangulation rounds grow the UG wherever a
 * conditional test contradicts the current structure, re-solving the IP
 * after each growing round, until a round adds nothing (or max_rounds).
 * The UG grows monotonically and repeat tests are cached, so the loop
 * terminates. Deterministic given (dataset, config).
 */
inline LearnResult learn_mecip(const CategoricalDataset& ds, const LearnConfig& cfg = {}) {
    cfg.validate();
    if (ds.n_vars() < 2) throw argument_error("learn_mecip: need at least two variables");
    const auto t_total = detail::Clock::now();

    LearnResult result;
    result.algorithm = "mecip";

    auto t = detail::Clock::now();
    const auto weights = pairwise_tests(ds);
    result.elapsed.pairwise = detail::seconds_since(t);

    t = detail::Clock::now();
    auto ug = significance_filter(build_emsg(ds.n_vars(), weights), weights, cfg.alpha);
    result.elapsed.emsg = detail::seconds_since(t);

    ScoreCache cache(ds);
    auto solve_over = [&](const PartiallyDirectedGraph& g) {
        auto t_score = detail::Clock::now();
        const auto table =
            build_score_table(ds, g, cache, cfg.max_parent_set_size, cfg.candidate_budget);
        result.elapsed.score_table += detail::seconds_since(t_score);
        auto t_solve = detail::Clock::now();
        auto sol = solve_to_acyclic(table);
        result.elapsed.solve += detail::seconds_since(t_solve);
        return sol;
    };

    auto sol = solve_over(ug);
    result.cpdag = cpdag_of(sol.dag);
    result.bic = sol.objective;

    TestedPairCache tested;
    while (result.rounds < cfg.max_rounds) {
        auto t_tri = detail::Clock::now();
        const int added = triangulation_pass(ds, result.cpdag, ug, cfg, tested);
        result.elapsed.triangulation += detail::seconds_since(t_tri);
        ++result.rounds;
        result.edges_added.push_back(added);
        if (added == 0) break; // no growth and no re-solve: nothing can improve
        sol = solve_over(ug);
        result.cpdag = cpdag_of(sol.dag);
        result.bic = sol.objective; // optimum over a superset of candidates: never decreases
    }

    result.elapsed.total = detail::seconds_since(t_total);
    return result;
}

namespace detail {

// Order-independent structure fingerprint for the tabu list; updates in
// O(1) per single-edge move.
inline std::uint64_t edge_token(int u, int v, int n) {
    std::uint64_t s = static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) +
                      static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
    return splitmix64(s);
}

} // namespace detail

/**
 * Greedy hill climbing over DAG space with a tabu list, the approximate
 * baseline. Moves are single-edge additions, deletions and reversals
 * scored by BIC deltas; the search always takes the best legal non-tabu
 * move (even a worsening one), remembers the best structure seen, and
 * stops after 15 consecutive non-improving moves. The tabu list holds the
 * fingerprints of the last 100 visited structures. Fully deterministic.
 */
inline LearnResult learn_hc_tabu(const CategoricalDataset& ds, const LearnConfig& cfg = {}) {
    cfg.validate();
    const int n = ds.n_vars();
    if (n < 2) throw argument_error("learn_hc_tabu: need at least two variables");
    const auto t_total = detail::Clock::now();
    constexpr int kTabuLength = 100;
    constexpr int kPatience = 15;

    ScoreCache cache(ds);
    PartiallyDirectedGraph dag(n);
    std::vector<double> local(static_cast<std::size_t>(n));
    double current = 0.0;
    for (int v = 0; v < n; ++v) {
        local[static_cast<std::size_t>(v)] = cache.score(v, {});
        current += local[static_cast<std::size_t>(v)];
    }
    PartiallyDirectedGraph best_dag = dag;
    double best = current;

    std::uint64_t cur_hash = 0;
    std::deque<std::uint64_t> tabu_order;
    std::unordered_set<std::uint64_t> tabu;
    auto remember = [&](std::uint64_t h) {
        tabu_order.push_back(h);
        tabu.insert(h);
        if (tabu_order.size() > kTabuLength) {
            tabu.erase(tabu_order.front());
            tabu_order.pop_front();
        }
    };
    remember(cur_hash);

    auto has_path = [&](int from, int to) {
        std::vector<int> stack{from};
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        seen[static_cast<std::size_t>(from)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (v == to) return true;
            for (int c : dag.children(v))
                if (!seen[static_cast<std::size_t>(c)]) {
                    seen[static_cast<std::size_t>(c)] = 1;
                    stack.push_back(c);
                }
        }
        return false;
    };
    auto with_parent = [](std::vector<int> ps, int p) {
        ps.push_back(p);
        std::sort(ps.begin(), ps.end());
        return ps;
    };
    auto without_parent = [](std::vector<int> ps, int p) {
        ps.erase(std::remove(ps.begin(), ps.end(), p), ps.end());
        return ps;
    };

    int moves = 0, stale = 0;
    while (stale < kPatience) {
        enum class Kind { None, Add, Delete, Reverse };
        Kind best_kind = Kind::None;
        int best_u = -1, best_v = -1;
        double best_delta = 0.0;
        bool have_move = false;

        for (int u = 0; u < n; ++u) {
            for (int v = 0; v < n; ++v) {
                if (u == v) continue;
                if (dag.has_directed(u, v)) {
                    const auto pv = dag.parents(v);
                    const double d_del =
                        cache.score(v, without_parent(pv, u)) - local[static_cast<std::size_t>(v)];
                    const std::uint64_t h_del = cur_hash ^ detail::edge_token(u, v, n);
                    if (!tabu.count(h_del) && (!have_move || d_del > best_delta)) {
                        have_move = true;
                        best_delta = d_del;
                        best_kind = Kind::Delete;
                        best_u = u;
                        best_v = v;
                    }
                    // reverse u->v: legal when no other directed path u ~> v remains
                    dag.remove_edge(u, v);
                    const bool legal = !has_path(u, v);
                    dag.add_directed(u, v);
                    if (legal) {
                        const double d_rev =
                            d_del + cache.score(u, with_parent(dag.parents(u), v)) -
                            local[static_cast<std::size_t>(u)];
                        const std::uint64_t h_rev = cur_hash ^ detail::edge_token(u, v, n) ^
                                                    detail::edge_token(v, u, n);
                        if (!tabu.count(h_rev) && (!have_move || d_rev > best_delta)) {
                            have_move = true;
                            best_delta = d_rev;
                            best_kind = Kind::Reverse;
                            best_u = u;
                            best_v = v;
                        }
                    }
                } else if (!dag.adjacent(u, v)) {
                    if (has_path(v, u)) continue; // adding u->v would close a cycle
                    const double d_add =
                        cache.score(v, with_parent(dag.parents(v), u)) -
                        local[static_cast<std::size_t>(v)];
                    const std::uint64_t h_add = cur_hash ^ detail::edge_token(u, v, n);
                    if (!tabu.count(h_add) && (!have_move || d_add > best_delta)) {
                        have_move = true;
                        best_delta = d_add;
                        best_kind = Kind::Add;
                        best_u = u;
                        best_v = v;
                    }
                }
            }
        }
        if (!have_move) break;

        switch (best_kind) {
        case Kind::Add:
            dag.add_directed(best_u, best_v);
            cur_hash ^= detail::edge_token(best_u, best_v, n);
            break;
        case Kind::Delete:
            dag.remove_edge(best_u, best_v);
            cur_hash ^= detail::edge_token(best_u, best_v, n);
            break;
        case Kind::Reverse:
            dag.remove_edge(best_u, best_v);
            dag.add_directed(best_v, best_u);
            cur_hash ^= detail::edge_token(best_u, best_v, n) ^ detail::edge_token(best_v, best_u, n);
            break;
        case Kind::None:
            break;
        }
        local[static_cast<std::size_t>(best_v)] = cache.score(best_v, dag.parents(best_v));
        if (best_kind == Kind::Reverse)
            local[static_cast<std::size_t>(best_u)] = cache.score(best_u, dag.parents(best_u));
        current += best_delta;
        remember(cur_hash);
        ++moves;
        if (current > best + 1e-9) {
            best = current;
            best_dag = dag;
            stale = 0;
        } else {
            ++stale;
        }
    }

    LearnResult result;
    result.algorithm = "hc";
    result.cpdag = cpdag_of(best_dag);
    result.bic = best;
    result.rounds = moves;
    result.elapsed.total = detail::seconds_since(t_total);
    return result;
}

/**
 * Skeleton comparison against the true structure. missing = true edges
 * absent from the learned skeleton, extra = learned edges absent from the
 * true skeleton, both divided by the true edge count.
 */
inline StructMetrics structural_metrics(const DiscreteBayesNet& truth,
                                        const PartiallyDirectedGraph& learned) {
    if (truth.n_nodes() != learned.node_count())
        throw argument_error("structural_metrics: node sets differ");
    const int n = truth.n_nodes();
    StructMetrics m;
    int missing = 0, extra = 0;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const bool t = truth.dag.adjacent(u, v);
            const bool l = learned.adjacent(u, v);
            if (t) ++m.n_true_edges;
            if (l) ++m.n_learned_edges;
            if (t && !l) ++missing;
            if (!t && l) ++extra;
        }
    }
    // a structure with no true edges is degenerate; report against a unit
    // denominator rather than failing
    const double denom = m.n_true_edges > 0 ? static_cast<double>(m.n_true_edges) : 1.0;
    m.missing_pct = static_cast<double>(missing) / denom;
    m.extra_pct = static_cast<double>(extra) / denom;
    return m;
}

// Structured text report; '#' lines carry the scalar fields, the body is
// the edge list.
inline void write_learn_report(const LearnResult& r, const std::vector<std::string>& names,
                               std::ostream& out,
                               const std::vector<std::string>& extra_comments = {}) {
    std::vector<std::string> comments = extra_comments;
    comments.push_back("algorithm: " + r.algorithm);
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "bic: %.9f", r.bic);
        comments.push_back(buf);
    }
    comments.push_back("rounds: " + std::to_string(r.rounds));
    std::string added = "edges_added_per_round:";
    for (int a : r.edges_added) added += " " + std::to_string(a);
    comments.push_back(added);
    auto secs = [](const char* label, double v) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s: %.6f", label, v);
        return std::string(buf);
    };
    comments.push_back(secs("elapsed_pairwise_s", r.elapsed.pairwise));
    comments.push_back(secs("elapsed_emsg_s", r.elapsed.emsg));
    comments.push_back(secs("elapsed_score_table_s", r.elapsed.score_table));
    comments.push_back(secs("elapsed_solve_s", r.elapsed.solve));
    comments.push_back(secs("elapsed_triangulation_s", r.elapsed.triangulation));
    comments.push_back(secs("elapsed_total_s", r.elapsed.total));
    write_edge_list(r.cpdag, names, out, comments);
}

} // namespace mecip
