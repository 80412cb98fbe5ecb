// Command-line front end: learn structures, sample data, generate random
// networks, evaluate learned structures, and run replicated benchmarks.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mecip/benchmark.hpp"
#include "mecip/bif.hpp"
#include "mecip/dataset.hpp"
#include "mecip/pipeline.hpp"
#include "mecip/solver.hpp"

namespace {

struct GlobalOptions {
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::string out;
    std::string algo = "mecip";
    int replicates = 10;
    int threads = 1;
};

void add_global_options(CLI::App* cmd, GlobalOptions& g) {
    cmd->add_option("--seed", g.seed, "Deterministic seed");
    cmd->add_option("--alpha", g.alpha, "Significance threshold in (0,1)");
    cmd->add_option("--out,-o", g.out, "Output file (default: stdout)");
    cmd->add_option("--algo", g.algo, "Learning algorithm: mecip or hc");
    cmd->add_option("--replicates", g.replicates, "Benchmark replicates per cell");
    cmd->add_option("--threads", g.threads, "Benchmark worker threads");
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw mecip::io_error("cannot write '" + path + "'");
    return out;
}

int cmd_learn(const std::string& data_path, bool no_header, const std::string& dump_model_path,
              const GlobalOptions& g) {
    if (g.algo != "mecip" && g.algo != "hc")
        throw mecip::argument_error("unknown algorithm '" + g.algo + "' (expected mecip or hc)");
    const auto ds = mecip::load_csv(data_path, !no_header);
    mecip::LearnConfig cfg;
    cfg.alpha = g.alpha;
    cfg.seed = g.seed;
    cfg.validate();

    if (!dump_model_path.empty()) {
        mecip::ScoreCache cache(ds);
        const auto weights = mecip::pairwise_tests(ds);
        const auto ug = mecip::significance_filter(
            mecip::build_emsg(ds.n_vars(), weights), weights, cfg.alpha);
        const auto table = mecip::build_score_table(ds, ug, cache);
        const auto sol = mecip::solve_to_acyclic(table);
        auto out = open_output(dump_model_path);
        mecip::dump_model(table, sol.pool, out);
    }

    const auto result =
        g.algo == "mecip" ? mecip::learn_mecip(ds, cfg) : mecip::learn_hc_tabu(ds, cfg);

    std::vector<std::string> header = {
        "mecip learn",
        "data: " + data_path,
        "seed: " + std::to_string(g.seed),
        "alpha: " + std::to_string(g.alpha),
    };
    if (g.out.empty()) {
        mecip::write_learn_report(result, ds.names, std::cout, header);
    } else {
        auto out = open_output(g.out);
        mecip::write_learn_report(result, ds.names, out, header);
    }
    return 0;
}

int cmd_sample(const std::string& bif_path, long long n, bool no_header, const GlobalOptions& g) {
    if (n < 1) throw mecip::argument_error("-n must be at least 1");
    const auto net = mecip::read_bif(bif_path);
    const auto ds = mecip::forward_sample(net, static_cast<std::size_t>(n), g.seed);
    const std::vector<std::string> comments = {
        "mecip sample",
        "bif: " + bif_path,
        "n: " + std::to_string(n),
        "seed: " + std::to_string(g.seed),
    };
    if (g.out.empty()) {
        mecip::write_csv(ds, std::cout, comments, !no_header);
    } else {
        auto out = open_output(g.out);
        mecip::write_csv(ds, out, comments, !no_header);
    }
    return 0;
}

int cmd_gen(int nodes, int max_indeg, int max_states, int strength, const GlobalOptions& g) {
    if (strength < 1 || strength > 5)
        throw mecip::argument_error("--strength must lie in 1..5");
    mecip::SyntheticSpec spec;
    spec.n_nodes = nodes;
    spec.max_in_degree = max_indeg;
    spec.max_states = max_states;
    spec.strength = strength;
    spec.seed = g.seed;
    const auto net = mecip::gen_random_net(spec);
    const std::vector<std::string> comments = {
        "mecip gen",
        "nodes: " + std::to_string(nodes) + " max_in_degree: " + std::to_string(max_indeg) +
            " max_states: " + std::to_string(max_states) + " strength: " +
            std::to_string(strength),
        "cpt_rows: dirichlet(alpha = strength * 0.5 = " + std::to_string(0.5 * strength) + ")",
        "seed: " + std::to_string(g.seed),
    };
    if (g.out.empty()) {
        mecip::write_bif(net, std::cout, comments);
    } else {
        auto out = open_output(g.out);
        mecip::write_bif(net, out, comments);
    }
    return 0;
}

int cmd_benchmark(const std::string& spec_path, const GlobalOptions& g) {
    if (g.replicates < 1) throw mecip::argument_error("--replicates must be at least 1");
    if (g.threads < 1) throw mecip::argument_error("--threads must be at least 1");
    const auto cells = mecip::parse_bench_spec(spec_path);
    if (cells.empty()) throw mecip::argument_error("benchmark spec lists no cells");
    mecip::BenchOptions opts;
    opts.replicates = g.replicates;
    opts.base_seed = g.seed;
    opts.alpha = g.alpha;
    opts.threads = g.threads;
    opts.csv_path = g.out;
    const auto records = mecip::run_benchmark(cells, opts, std::cerr);
    mecip::print_aggregate_table(records, std::cout);
    return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& learned_path) {
    const auto truth = mecip::read_bif(truth_path);
    std::ifstream in(learned_path);
    if (!in) throw mecip::io_error("cannot open '" + learned_path + "'");
    const auto learned = mecip::read_edge_list(in, truth.names);
    const auto m = mecip::structural_metrics(truth, learned);
    std::cout << "missing_pct: " << m.missing_pct << '\n'
              << "extra_pct: " << m.extra_pct << '\n'
              << "n_true_edges: " << m.n_true_edges << '\n'
              << "n_learned_edges: " << m.n_learned_edges << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MEC-IP structure learning toolkit"};
    app.require_subcommand(1);
    GlobalOptions g;

    auto* learn = app.add_subcommand("learn", "Learn a CPDAG from a CSV dataset");
    std::string learn_data;
    bool learn_no_header = false;
    std::string dump_model_path;
    learn->add_option("data", learn_data, "CSV dataset path")->required();
    learn->add_flag("--no-header", learn_no_header, "Dataset has no header row");
    learn->add_option("--dump-model", dump_model_path,
                      "Write the initial IP model (scores and cuts) to a file");
    add_global_options(learn, g);

    auto* sample = app.add_subcommand("sample", "Sample a CSV dataset from a BIF network");
    std::string sample_bif;
    long long sample_n = 0;
    bool sample_no_header = false;
    sample->add_option("bif", sample_bif, "BIF network path")->required();
    sample->add_option("-n", sample_n, "Number of rows")->required();
    sample->add_flag("--no-header", sample_no_header, "Omit the header row");
    add_global_options(sample, g);

    auto* gen = app.add_subcommand("gen", "Generate a random synthetic network as BIF");
    int gen_nodes = 20, gen_indeg = 2, gen_states = 2, gen_strength = 1;
    gen->add_option("--nodes", gen_nodes, "Node count");
    gen->add_option("--max-indeg", gen_indeg, "Maximum in-degree");
    gen->add_option("--max-states", gen_states, "Maximum states per variable");
    gen->add_option("--strength", gen_strength, "Dependence strength, 1 (strong) .. 5 (weak)");
    add_global_options(gen, g);

    auto* bench = app.add_subcommand("benchmark", "Run replicated benchmark cells");
    std::string bench_spec;
    bench->add_option("--spec", bench_spec, "Benchmark spec file")->required();
    add_global_options(bench, g);

    auto* eval = app.add_subcommand("eval", "Compare a learned edge list against a BIF network");
    std::string eval_truth, eval_learned;
    eval->add_option("--truth", eval_truth, "Ground-truth BIF path")->required();
    eval->add_option("--learned", eval_learned, "Learned edge-list path")->required();
    add_global_options(eval, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (learn->parsed()) return cmd_learn(learn_data, learn_no_header, dump_model_path, g);
        if (sample->parsed()) return cmd_sample(sample_bif, sample_n, sample_no_header, g);
        if (gen->parsed()) return cmd_gen(gen_nodes, gen_indeg, gen_states, gen_strength, g);
        if (bench->parsed()) return cmd_benchmark(bench_spec, g);
        if (eval->parsed()) return cmd_eval(eval_truth, eval_learned);
    } catch (const mecip::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
