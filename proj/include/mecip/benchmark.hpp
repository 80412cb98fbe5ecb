#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mecip/bayesnet.hpp"
#include "mecip/bif.hpp"
#include "mecip/errors.hpp"
#include "mecip/pipeline.hpp"

namespace mecip {

// One benchmark measurement: a (network, sample size, algorithm) cell at
// one replicate seed.
struct BenchmarkRecord {
    std::string network;
    long long n = 0;
    std::string algorithm;
    std::uint64_t seed = 0;
    double missing_pct = 0.0;
    double extra_pct = 0.0;
    double seconds = 0.0;
};

struct BenchCell {
    std::string id;
    bool synthetic = false;
    std::string bif_path;   // when !synthetic
    SyntheticSpec spec;     // when synthetic (seed filled per replicate)
    long long sample_size = 0;
    std::vector<std::string> algorithms;
};

/**
 * Parses a benchmark spec file: one cell per line,
 *
 *   <bif-path | n,d,s,w> <sample-size> <algo[,algo]>
 *
 * where the four-integer tuple is (nodes, max in-degree, max states,
 * strength). '#' lines and blank lines are skipped. Algorithms must be
 * 'mecip' or 'hc'.
 */
inline std::vector<BenchCell> parse_bench_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::vector<BenchCell> cells;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string target, size_tok, algos_tok;
        if (!(ls >> target)) continue;
        if (target[0] == '#') continue;
        if (!(ls >> size_tok >> algos_tok))
            throw parse_error("benchmark spec line " + std::to_string(lineno) +
                              ": expected '<network> <sample-size> <algos>'");

        BenchCell cell;
        int tuple[4];
        if (std::sscanf(target.c_str(), "%d,%d,%d,%d", &tuple[0], &tuple[1], &tuple[2],
                        &tuple[3]) == 4) {
            cell.synthetic = true;
            cell.spec.n_nodes = tuple[0];
            cell.spec.max_in_degree = tuple[1];
            cell.spec.max_states = tuple[2];
            cell.spec.strength = tuple[3];
            if (cell.spec.strength < 1 || cell.spec.strength > 5)
                throw parse_error("benchmark spec line " + std::to_string(lineno) +
                                  ": strength must lie in 1..5");
            cell.id = std::to_string(tuple[0]) + "-" + std::to_string(tuple[1]) + "-" +
                      std::to_string(tuple[2]) + "-" + std::to_string(tuple[3]);
        } else {
            cell.bif_path = target;
            cell.id = std::filesystem::path(target).stem().string();
        }
        try {
            cell.sample_size = std::stoll(size_tok);
        } catch (const std::exception&) {
            throw parse_error("benchmark spec line " + std::to_string(lineno) +
                              ": bad sample size '" + size_tok + "'");
        }
        if (cell.sample_size < 1)
            throw parse_error("benchmark spec line " + std::to_string(lineno) +
                              ": sample size must be positive");
        std::istringstream as(algos_tok);
        std::string algo;
        while (std::getline(as, algo, ',')) {
            if (algo != "mecip" && algo != "hc")
                throw argument_error("benchmark spec line " + std::to_string(lineno) +
                                     ": unknown algorithm '" + algo + "'");
            cell.algorithms.push_back(algo);
        }
        if (cell.algorithms.empty())
            throw parse_error("benchmark spec line " + std::to_string(lineno) +
                              ": no algorithms listed");
        cells.push_back(std::move(cell));
    }
    return cells;
}

struct BenchOptions {
    int replicates = 10;
    std::uint64_t base_seed = 1;
    double alpha = 0.05;
    int threads = 1;
    std::string csv_path;
};

namespace detail {

inline std::string format_mean_std(double mean, double std) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f (%.3f)", mean, std);
    return buf;
}

} // namespace detail

/**
 * Runs every (cell, algorithm, replicate) job. Replicate r uses seed
 * base_seed + r for sampling; synthetic cells additionally draw a fresh
 * network per replicate from a seed derived from it, so each replicate
 * sees an independent structure. Records are appended to the CSV (header
 * written only when the file is new) and flushed one by one, keeping a
 * partial file valid if the run is interrupted. With threads > 1 the
 * jobs run on a small worker pool; record content is deterministic, only
 * CSV row order varies by completion.
 */
inline std::vector<BenchmarkRecord> run_benchmark(const std::vector<BenchCell>& cells,
                                                  const BenchOptions& opts, std::ostream& log) {
    struct Job {
        std::size_t cell;
        std::string algorithm;
        int replicate;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (const auto& algo : cells[c].algorithms)
            for (int r = 0; r < opts.replicates; ++r) jobs.push_back({c, algo, r});

    // ground-truth networks for file-based cells are loaded once
    std::vector<DiscreteBayesNet> file_nets(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (!cells[c].synthetic) file_nets[c] = read_bif(cells[c].bif_path);

    std::ofstream csv;
    const bool fresh = opts.csv_path.empty() ||
                       !std::filesystem::exists(opts.csv_path) ||
                       std::filesystem::file_size(opts.csv_path) == 0;
    if (!opts.csv_path.empty()) {
        csv.open(opts.csv_path, std::ios::app);
        if (!csv) throw io_error("cannot write '" + opts.csv_path + "'");
        if (fresh) {
            csv << "# base_seed=" << opts.base_seed << " replicates=" << opts.replicates
                << " alpha=" << opts.alpha << '\n';
            csv << "network,n,algorithm,seed,missing_pct,extra_pct,seconds\n";
            csv.flush();
        }
    }

    std::vector<BenchmarkRecord> records(jobs.size());
    std::mutex io_mu;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job& job = jobs[j];
            const BenchCell& cell = cells[job.cell];
            const std::uint64_t seed = opts.base_seed + static_cast<std::uint64_t>(job.replicate);

            DiscreteBayesNet generated;
            const DiscreteBayesNet* truth = nullptr;
            if (cell.synthetic) {
                SyntheticSpec spec = cell.spec;
                spec.seed = mix_seed(seed, 0x6e6574ULL); // independent stream for the structure
                generated = gen_random_net(spec);
                truth = &generated;
            } else {
                truth = &file_nets[job.cell];
            }
            const auto ds = forward_sample(*truth, static_cast<std::size_t>(cell.sample_size), seed);

            LearnConfig cfg;
            cfg.alpha = opts.alpha;
            cfg.seed = seed;
            const auto t0 = detail::Clock::now();
            const LearnResult learned =
                job.algorithm == "mecip" ? learn_mecip(ds, cfg) : learn_hc_tabu(ds, cfg);
            const double seconds = detail::seconds_since(t0);
            const auto metrics = structural_metrics(*truth, learned.cpdag);

            BenchmarkRecord rec{cell.id,          cell.sample_size, job.algorithm, seed,
                                metrics.missing_pct, metrics.extra_pct, seconds};
            records[j] = rec;

            std::lock_guard lock(io_mu);
            if (csv.is_open()) {
                char buf[256];
                std::snprintf(buf, sizeof buf, "%s,%lld,%s,%llu,%.6f,%.6f,%.6f",
                              rec.network.c_str(), rec.n, rec.algorithm.c_str(),
                              static_cast<unsigned long long>(rec.seed), rec.missing_pct,
                              rec.extra_pct, rec.seconds);
                csv << buf << '\n';
                csv.flush();
            }
            log << "done " << rec.network << " n=" << rec.n << " " << rec.algorithm
                << " seed=" << rec.seed << " missing=" << rec.missing_pct
                << " extra=" << rec.extra_pct << " t=" << rec.seconds << "s\n";
        }
    };

    const int n_threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(jobs.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return records;
}

// Aggregates records per (network, n, algorithm) as "mean (std)" with the
// sample standard deviation (n-1 denominator; 0 for a single replicate).
inline void print_aggregate_table(const std::vector<BenchmarkRecord>& records, std::ostream& out) {
    struct Agg {
        std::vector<double> missing, extra, seconds;
    };
    std::map<std::tuple<std::string, long long, std::string>, Agg> groups;
    for (const auto& r : records) {
        auto& g = groups[{r.network, r.n, r.algorithm}];
        g.missing.push_back(r.missing_pct);
        g.extra.push_back(r.extra_pct);
        g.seconds.push_back(r.seconds);
    }
    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        if (xs.size() > 1) {
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size() - 1);
        }
        return std::pair{mean, std::sqrt(var)};
    };
    out << "network,n,algorithm,missing,extra,seconds\n";
    for (const auto& [key, agg] : groups) {
        const auto [mm, ms] = mean_std(agg.missing);
        const auto [em, es] = mean_std(agg.extra);
        const auto [sm, ss] = mean_std(agg.seconds);
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
            << detail::format_mean_std(mm, ms) << ',' << detail::format_mean_std(em, es) << ','
            << detail::format_mean_std(sm, ss) << '\n';
    }
}

} // namespace mecip
