#pragma once

#include <algorithm>
#include <vector>

#include "mecip/dataset.hpp"
#include "mecip/errors.hpp"
#include "mecip/graph.hpp"
#include "mecip/stats.hpp"

namespace mecip {

// Marginal association strength of one variable pair.
struct EdgeWeight {
    int u = -1;
    int v = -1; // u < v
    double weight = 0.0; // chi-squared statistic
    double p_value = 1.0;
};

// Unconditional chi-squared test for every unordered variable pair.
inline std::vector<EdgeWeight> pairwise_tests(const CategoricalDataset& ds) {
    const int n = ds.n_vars();
    if (n < 2) throw argument_error("pairwise_tests: need at least two variables");
    std::vector<EdgeWeight> out;
    out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const auto res = chi_sq_test(contingency(ds, u, v));
            out.push_back({u, v, res.statistic, res.p_value});
        }
    return out;
}

namespace detail {

inline std::vector<std::vector<double>> weight_matrix(int n, const std::vector<EdgeWeight>& weights,
                                                      const char* who) {
    std::vector<std::vector<double>> w(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), -1.0));
    for (const auto& e : weights) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v)
            throw argument_error(std::string(who) + ": bad pair in weight list");
        if (w[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] >= 0.0)
            throw argument_error(std::string(who) + ": duplicate pair in weight list");
        w[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] = e.weight;
        w[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] = e.weight;
    }
    return w;
}

} // namespace detail

/**
 * Builds the extended maximal spanning graph.
 *
 * Starting from the complete graph, edges are visited once in ascending
 * weight order (ties broken by lexicographic pair order) and edge {A,B}
 * is removed when some common neighbor C still carries both co-edges and
 * strictly dominates it: weight(A,C) > weight(A,B) and
 * weight(B,C) > weight(A,B). The weight list must cover every pair.
 */
inline PartiallyDirectedGraph build_emsg(int n, const std::vector<EdgeWeight>& weights) {
    if (n < 1) throw argument_error("build_emsg: need at least one node");
    if (weights.size() != static_cast<std::size_t>(n) * (n - 1) / 2)
        throw argument_error("build_emsg: weight list does not cover all pairs");
    const auto w = detail::weight_matrix(n, weights, "build_emsg");

    std::vector<EdgeWeight> order = weights;
    std::sort(order.begin(), order.end(), [](const EdgeWeight& a, const EdgeWeight& b) {
        const int au = std::min(a.u, a.v), av = std::max(a.u, a.v);
        const int bu = std::min(b.u, b.v), bv = std::max(b.u, b.v);
        if (a.weight != b.weight) return a.weight < b.weight;
        if (au != bu) return au < bu;
        return av < bv;
    });

    auto g = PartiallyDirectedGraph::complete_undirected(n);
    for (const auto& e : order) {
        if (!g.has_undirected(e.u, e.v)) continue;
        for (int c = 0; c < n; ++c) {
            if (c == e.u || c == e.v) continue;
            if (!g.has_undirected(e.u, c) || !g.has_undirected(e.v, c)) continue;
            if (w[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(c)] > e.weight &&
                w[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(c)] > e.weight) {
                g.remove_edge(e.u, e.v);
                break;
            }
        }
    }
    return g;
}

// Keeps exactly the edges whose test rejects independence at level alpha
// (p <= alpha); high-p (plausibly independent) edges are dropped.
inline PartiallyDirectedGraph significance_filter(const PartiallyDirectedGraph& g,
                                                  const std::vector<EdgeWeight>& weights,
                                                  double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw argument_error("significance_filter: alpha must lie in (0,1)");
    const int n = g.node_count();
    std::vector<std::vector<double>> p(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), -1.0));
    for (const auto& e : weights) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v)
            throw argument_error("significance_filter: bad pair in weight list");
        p[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] = e.p_value;
        p[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] = e.p_value;
    }
    PartiallyDirectedGraph out(n);
    for (auto [u, v] : g.undirected_edges()) {
        const double pv = p[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
        if (pv < 0.0)
            throw argument_error("significance_filter: no p-value for an edge of the graph");
        if (pv <= alpha) out.add_undirected(u, v);
    }
    return out;
}

} // namespace mecip
