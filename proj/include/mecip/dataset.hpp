#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mecip/errors.hpp"

namespace mecip {

/**
 * An N x V table of small-integer category codes.
 *
 * Codes are assigned per column in first-appearance order; the original
 * labels are retained so written output reproduces the source values.
 * Storage is column-major since every consumer (tests, scores) scans
 * whole columns.
 */
struct CategoricalDataset {
    std::vector<std::string> names;
    std::vector<int> cardinalities;
    std::vector<std::vector<std::string>> labels; // labels[v][code]
    std::vector<std::vector<int>> columns;        // columns[v][row]
    std::size_t n_rows = 0;

    int n_vars() const { return static_cast<int>(names.size()); }

    int code(std::size_t row, int var) const { return columns[static_cast<std::size_t>(var)][row]; }

    const std::string& label(int var, int c) const {
        return labels[static_cast<std::size_t>(var)][static_cast<std::size_t>(c)];
    }

    void validate() const {
        if (names.empty()) throw argument_error("dataset: no variables");
        if (n_rows == 0) throw argument_error("dataset: no rows");
        if (cardinalities.size() != names.size() || columns.size() != names.size() ||
            labels.size() != names.size())
            throw argument_error("dataset: inconsistent column metadata");
        for (std::size_t v = 0; v < names.size(); ++v) {
            if (names[v].empty()) throw argument_error("dataset: empty variable name");
            for (std::size_t w = v + 1; w < names.size(); ++w)
                if (names[v] == names[w])
                    throw argument_error("dataset: duplicate variable name '" + names[v] + "'");
            if (cardinalities[v] < 1) throw argument_error("dataset: cardinality must be >= 1");
            if (labels[v].size() != static_cast<std::size_t>(cardinalities[v]))
                throw argument_error("dataset: label table size mismatch");
            if (columns[v].size() != n_rows) throw argument_error("dataset: ragged column");
            for (int c : columns[v])
                if (c < 0 || c >= cardinalities[v])
                    throw argument_error("dataset: code out of range in column " + names[v]);
        }
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

} // namespace detail

/**
 * Loads a comma-separated categorical data file.
 *
 * Supported syntax is deliberately narrow: UTF-8 text, an optional first
 * header row, no quoting or escaping (cells may not contain commas), and
 * no missing values (an empty cell is a hard error). Lines starting with
 * '#' are comments; blank lines are skipped. Category codes are assigned
 * in first-appearance order per column.
 */
inline CategoricalDataset load_csv(const std::string& path, bool header = true) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");

    CategoricalDataset ds;
    std::vector<std::unordered_map<std::string, int>> codebook;
    std::string line;
    std::size_t lineno = 0;
    bool have_names = false;
    bool have_width = false;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;

        auto cells = detail::split_csv_line(line);

        if (header && !have_names) {
            for (const auto& name : cells) {
                if (name.empty())
                    throw parse_error("line " + std::to_string(lineno) + ": empty header name");
                for (const auto& prev : ds.names)
                    if (prev == name)
                        throw parse_error("line " + std::to_string(lineno) +
                                          ": duplicate header name '" + name + "'");
                ds.names.push_back(name);
            }
            width = cells.size();
            have_names = have_width = true;
            continue;
        }

        if (!have_width) {
            width = cells.size();
            have_width = true;
        }
        if (cells.size() != width)
            throw parse_error("line " + std::to_string(lineno) + ": expected " +
                              std::to_string(width) + " cells, got " +
                              std::to_string(cells.size()));

        if (ds.columns.empty()) {
            ds.columns.resize(width);
            ds.labels.resize(width);
            codebook.resize(width);
        }
        for (std::size_t v = 0; v < width; ++v) {
            if (cells[v].empty())
                throw parse_error("line " + std::to_string(lineno) +
                                  ": missing value (empty cell) in column " + std::to_string(v + 1));
            auto [it, inserted] =
                codebook[v].try_emplace(cells[v], static_cast<int>(ds.labels[v].size()));
            if (inserted) ds.labels[v].push_back(cells[v]);
            ds.columns[v].push_back(it->second);
        }
        ++ds.n_rows;
    }

    if (ds.n_rows == 0) throw parse_error("'" + path + "': no data rows");
    if (!header) {
        for (std::size_t v = 0; v < width; ++v) ds.names.push_back("V" + std::to_string(v));
    } else if (ds.names.size() != width) {
        throw parse_error("'" + path + "': header width differs from data width");
    }
    for (std::size_t v = 0; v < width; ++v)
        ds.cardinalities.push_back(static_cast<int>(ds.labels[v].size()));
    ds.validate();
    return ds;
}

// Writes the dataset back out through the retained label map. Comment
// lines are emitted first, prefixed with "# ".
inline void write_csv(const CategoricalDataset& ds, std::ostream& out,
                      const std::vector<std::string>& comments = {}, bool header = true) {
    for (const auto& c : comments) out << "# " << c << '\n';
    if (header) {
        for (int v = 0; v < ds.n_vars(); ++v) {
            if (v) out << ',';
            out << ds.names[static_cast<std::size_t>(v)];
        }
        out << '\n';
    }
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        for (int v = 0; v < ds.n_vars(); ++v) {
            if (v) out << ',';
            out << ds.label(v, ds.code(r, v));
        }
        out << '\n';
    }
}

inline void write_csv(const CategoricalDataset& ds, const std::string& path,
                      const std::vector<std::string>& comments = {}, bool header = true) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    write_csv(ds, out, comments, header);
}

/**
 * Observed counts for a variable pair, stratified by a conditioning set.
 *
 * counts[s][i][j] is the number of rows with conditioning configuration s,
 * first variable = i, second variable = j. Strata enumerate configurations
 * of the conditioning set (sorted ascending by variable index) in
 * mixed-radix order, earliest variable most significant.
 */
struct ContingencyTable {
    int r = 0; // states of the first variable
    int c = 0; // states of the second variable
    long long q = 1; // number of strata (1 when unconditioned)
    std::vector<long long> counts; // q * r * c, stratum-major
    long long total = 0;

    long long at(long long s, int i, int j) const {
        return counts[static_cast<std::size_t>((s * r + i) * c + j)];
    }
    long long& at(long long s, int i, int j) {
        return counts[static_cast<std::size_t>((s * r + i) * c + j)];
    }
};

inline ContingencyTable contingency(const CategoricalDataset& ds, int a, int b,
                                    std::vector<int> cond = {}) {
    const int nv = ds.n_vars();
    auto check_index = [&](int v) {
        if (v < 0 || v >= nv) throw argument_error("contingency: variable index out of range");
    };
    check_index(a);
    check_index(b);
    if (a == b) throw argument_error("contingency: a and b must differ");
    std::sort(cond.begin(), cond.end());
    for (std::size_t i = 0; i < cond.size(); ++i) {
        check_index(cond[i]);
        if (cond[i] == a || cond[i] == b)
            throw argument_error("contingency: conditioning set overlaps the tested pair");
        if (i > 0 && cond[i] == cond[i - 1])
            throw argument_error("contingency: duplicate conditioning variable");
    }

    ContingencyTable t;
    t.r = ds.cardinalities[static_cast<std::size_t>(a)];
    t.c = ds.cardinalities[static_cast<std::size_t>(b)];
    for (int z : cond) {
        t.q *= ds.cardinalities[static_cast<std::size_t>(z)];
        if (t.q > (1LL << 28))
            throw resource_error("contingency: conditioning stratum count exceeds 2^28");
    }
    t.counts.assign(static_cast<std::size_t>(t.q) * t.r * t.c, 0);

    const auto& col_a = ds.columns[static_cast<std::size_t>(a)];
    const auto& col_b = ds.columns[static_cast<std::size_t>(b)];
    for (std::size_t row = 0; row < ds.n_rows; ++row) {
        long long s = 0;
        for (int z : cond)
            s = s * ds.cardinalities[static_cast<std::size_t>(z)] +
                ds.columns[static_cast<std::size_t>(z)][row];
        ++t.at(s, col_a[row], col_b[row]);
    }
    t.total = static_cast<long long>(ds.n_rows);
    return t;
}

} // namespace mecip
