#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mecip/dataset.hpp"
#include "mecip/errors.hpp"
#include "mecip/graph.hpp"
#include "mecip/rng.hpp"

namespace mecip {

/**
 * A discrete Bayesian network: a DAG plus one conditional probability
 * table per node.
 *
 * CPTs are stored flat, one row per parent configuration. Parents are
 * kept in ascending node order and configurations enumerate mixed-radix
 * with the first (smallest-index) parent most significant; row r of node
 * v lists P(v = k | config r) for k = 0..card(v)-1.
 */
struct DiscreteBayesNet {
    std::vector<std::string> names;
    std::vector<int> cardinalities;
    std::vector<std::vector<std::string>> states; // states[v][k]
    PartiallyDirectedGraph dag;
    std::vector<std::vector<double>> cpts;

    int n_nodes() const { return static_cast<int>(names.size()); }

    std::vector<int> parents(int v) const { return dag.parents(v); }

    long long config_count(int v) const {
        long long q = 1;
        for (int p : dag.parents(v)) q *= cardinalities[static_cast<std::size_t>(p)];
        return q;
    }

    const double* cpt_row(int v, long long config) const {
        return cpts[static_cast<std::size_t>(v)].data() +
               static_cast<std::size_t>(config) * cardinalities[static_cast<std::size_t>(v)];
    }

    void validate() const {
        const std::size_t n = names.size();
        if (cardinalities.size() != n || states.size() != n || cpts.size() != n ||
            dag.node_count() != static_cast<int>(n))
            throw argument_error("bayesnet: inconsistent field sizes");
        if (dag.has_undirected_edges()) throw structural_error("bayesnet: undirected edges");
        if (!directed_part_acyclic(dag)) throw structural_error("bayesnet: directed cycle");
        for (std::size_t v = 0; v < n; ++v) {
            const int r = cardinalities[v];
            if (r < 1) throw argument_error("bayesnet: cardinality must be >= 1");
            if (states[v].size() != static_cast<std::size_t>(r))
                throw argument_error("bayesnet: state list size mismatch for " + names[v]);
            const long long q = config_count(static_cast<int>(v));
            if (cpts[v].size() != static_cast<std::size_t>(q) * static_cast<std::size_t>(r))
                throw argument_error("bayesnet: CPT size mismatch for " + names[v]);
            for (long long j = 0; j < q; ++j) {
                double sum = 0.0;
                for (int k = 0; k < r; ++k) {
                    const double p = cpts[v][static_cast<std::size_t>(j) * r + k];
                    if (!(p >= 0.0 && p <= 1.0))
                        throw argument_error("bayesnet: probability out of [0,1] in " + names[v]);
                    sum += p;
                }
                if (std::fabs(sum - 1.0) > 1e-9)
                    throw argument_error("bayesnet: CPT row of " + names[v] +
                                         " does not sum to 1");
            }
        }
    }
};

/**
 * Ancestral sampling: nodes are visited in topological order and each is
 * drawn from its CPT row given the already-sampled parents. The result is
 * fully determined by (net, n, seed).
 */
inline CategoricalDataset forward_sample(const DiscreteBayesNet& net, std::size_t n,
                                         std::uint64_t seed) {
    if (n < 1) throw argument_error("forward_sample: need at least one row");
    net.validate();
    const int nv = net.n_nodes();
    const auto order = topological_order(net.dag);
    std::vector<std::vector<int>> parent_list(static_cast<std::size_t>(nv));
    for (int v = 0; v < nv; ++v) parent_list[static_cast<std::size_t>(v)] = net.parents(v);

    CategoricalDataset ds;
    ds.names = net.names;
    ds.cardinalities = net.cardinalities;
    ds.labels = net.states;
    ds.columns.assign(static_cast<std::size_t>(nv), {});
    for (auto& col : ds.columns) col.resize(n);
    ds.n_rows = n;

    Rng rng(seed);
    std::vector<int> codes(static_cast<std::size_t>(nv), 0);
    for (std::size_t row = 0; row < n; ++row) {
        for (int v : order) {
            long long config = 0;
            for (int p : parent_list[static_cast<std::size_t>(v)])
                config = config * net.cardinalities[static_cast<std::size_t>(p)] +
                         codes[static_cast<std::size_t>(p)];
            const int k = rng.categorical(net.cpt_row(v, config),
                                          net.cardinalities[static_cast<std::size_t>(v)]);
            codes[static_cast<std::size_t>(v)] = k;
            ds.columns[static_cast<std::size_t>(v)][row] = k;
        }
    }
    return ds;
}

/**
 * Parameters of a random synthetic network: node count, in-degree bound,
 * state-count bound, dependence strength (1 strong ... 5 weak) and seed.
 */
struct SyntheticSpec {
    int n_nodes = 20;
    int max_in_degree = 2;
    int max_states = 2;
    int strength = 1;
    std::uint64_t seed = 0;
};

/**
 * Draws a random discrete network. The DAG is sampled under a uniformly
 * random topological order: each node receives an in-degree uniform on
 * [0, min(max_in_degree, #predecessors)] and that many distinct parents
 * uniformly among its predecessors. Cardinalities are uniform on
 * [2, max_states]. CPT rows are symmetric Dirichlet draws with
 * concentration alpha = strength * 0.5, so strength 1 gives peaked
 * (strong) rows and strength 5 nearly flat (weak) ones.
 */
inline DiscreteBayesNet gen_random_net(const SyntheticSpec& spec) {
    if (spec.n_nodes < 1) throw argument_error("gen_random_net: n_nodes must be positive");
    if (spec.max_in_degree < 1) throw argument_error("gen_random_net: max_in_degree must be positive");
    if (spec.max_states < 2) throw argument_error("gen_random_net: max_states must be >= 2");
    if (spec.strength < 1) throw argument_error("gen_random_net: strength must be positive");

    Rng rng(spec.seed);
    const int n = spec.n_nodes;

    DiscreteBayesNet net;
    net.dag = PartiallyDirectedGraph(n);
    for (int v = 0; v < n; ++v) {
        net.names.push_back("X" + std::to_string(v));
        net.cardinalities.push_back(rng.uniform_int(2, spec.max_states));
    }
    for (int v = 0; v < n; ++v) {
        net.states.emplace_back();
        for (int k = 0; k < net.cardinalities[static_cast<std::size_t>(v)]; ++k)
            net.states.back().push_back("s" + std::to_string(k));
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v;
    rng.shuffle(order);

    for (int pos = 0; pos < n; ++pos) {
        const int v = order[static_cast<std::size_t>(pos)];
        const int bound = std::min(spec.max_in_degree, pos);
        const int d = rng.uniform_int(0, bound);
        std::vector<int> pool(order.begin(), order.begin() + pos);
        for (int taken = 0; taken < d; ++taken) {
            const std::size_t j =
                static_cast<std::size_t>(taken) +
                rng.uniform_below(static_cast<std::uint64_t>(pool.size() - taken));
            std::swap(pool[static_cast<std::size_t>(taken)], pool[j]);
            net.dag.add_directed(pool[static_cast<std::size_t>(taken)], v);
        }
    }

    const double alpha = 0.5 * static_cast<double>(spec.strength);
    net.cpts.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        const int r = net.cardinalities[static_cast<std::size_t>(v)];
        const long long q = net.config_count(v);
        auto& cpt = net.cpts[static_cast<std::size_t>(v)];
        cpt.reserve(static_cast<std::size_t>(q) * static_cast<std::size_t>(r));
        for (long long j = 0; j < q; ++j) {
            const auto row = rng.dirichlet(static_cast<std::size_t>(r), alpha);
            cpt.insert(cpt.end(), row.begin(), row.end());
        }
    }
    net.validate();
    return net;
}

} // namespace mecip
