#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mecip/bayesnet.hpp"
#include "mecip/errors.hpp"

namespace mecip {

namespace detail {

struct BifToken {
    std::string text;
    std::size_t line;
};

inline bool is_bif_punct(char c) {
    return c == '{' || c == '}' || c == '(' || c == ')' || c == '[' || c == ']' || c == '|' ||
           c == ',' || c == ';';
}

inline std::vector<BifToken> bif_tokenize(std::istream& in) {
    std::vector<BifToken> tokens;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = 0;
        const std::size_t len = line.size();
        while (i < len) {
            const char c = line[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (c == '/' && i + 1 < len && line[i + 1] == '/') break; // comment to end of line
            if (is_bif_punct(c)) {
                tokens.push_back({std::string(1, c), lineno});
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < len && !std::isspace(static_cast<unsigned char>(line[j])) &&
                   !is_bif_punct(line[j]) &&
                   !(line[j] == '/' && j + 1 < len && line[j + 1] == '/'))
                ++j;
            tokens.push_back({line.substr(i, j - i), lineno});
            i = j;
        }
    }
    return tokens;
}

class BifParser {
public:
    explicit BifParser(std::vector<BifToken> tokens) : tokens_(std::move(tokens)) {}

    DiscreteBayesNet parse() {
        while (!at_end()) {
            const auto& t = peek();
            if (t.text == "network")
                parse_network_block();
            else if (t.text == "variable")
                parse_variable();
            else if (t.text == "probability")
                parse_probability();
            else
                fail("expected 'network', 'variable' or 'probability', got '" + t.text + "'");
        }
        return assemble();
    }

private:
    struct VarDecl {
        std::string name;
        std::vector<std::string> states;
        std::size_t line;
    };
    struct ProbDecl {
        std::string child;
        std::vector<std::string> parents; // declared order
        bool table_form = false;
        std::vector<double> table_values;
        std::vector<std::pair<std::vector<std::string>, std::vector<double>>> rows;
        std::size_t line;
    };

    bool at_end() const { return pos_ >= tokens_.size(); }
    const BifToken& peek() const {
        if (at_end()) throw parse_error("bif: unexpected end of file");
        return tokens_[pos_];
    }
    BifToken take() {
        const auto t = peek();
        ++pos_;
        return t;
    }
    void expect(const std::string& text) {
        const auto t = take();
        if (t.text != text)
            throw parse_error("bif line " + std::to_string(t.line) + ": expected '" + text +
                              "', got '" + t.text + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const std::size_t line = at_end() ? (tokens_.empty() ? 0 : tokens_.back().line) : peek().line;
        throw parse_error("bif line " + std::to_string(line) + ": " + msg);
    }

    double number(const BifToken& t) const {
        char* end = nullptr;
        const double v = std::strtod(t.text.c_str(), &end);
        if (end == t.text.c_str() || *end != '\0')
            throw parse_error("bif line " + std::to_string(t.line) + ": expected a number, got '" +
                              t.text + "'");
        return v;
    }

    void parse_network_block() {
        expect("network");
        while (!at_end() && peek().text != "{") take(); // network name, possibly several tokens
        expect("{");
        if (peek().text != "}") fail("unsupported content in network block");
        expect("}");
    }

    void parse_variable() {
        const auto kw = take(); // 'variable'
        VarDecl decl;
        decl.line = kw.line;
        decl.name = take().text;
        expect("{");
        expect("type");
        expect("discrete");
        expect("[");
        const auto count_tok = take();
        const int declared = static_cast<int>(number(count_tok));
        expect("]");
        expect("{");
        while (peek().text != "}") {
            decl.states.push_back(take().text);
            if (peek().text == ",") take();
        }
        expect("}");
        expect(";");
        expect("}");
        if (static_cast<int>(decl.states.size()) != declared)
            throw parse_error("bif line " + std::to_string(decl.line) + ": variable '" + decl.name +
                              "' declares " + std::to_string(declared) + " states but lists " +
                              std::to_string(decl.states.size()));
        variables_.push_back(std::move(decl));
    }

    void parse_probability() {
        const auto kw = take(); // 'probability'
        ProbDecl decl;
        decl.line = kw.line;
        expect("(");
        decl.child = take().text;
        if (peek().text == "|") {
            take();
            while (peek().text != ")") {
                decl.parents.push_back(take().text);
                if (peek().text == ",") take();
            }
        }
        expect(")");
        expect("{");
        while (peek().text != "}") {
            if (peek().text == "table") {
                take();
                decl.table_form = true;
                while (peek().text != ";") {
                    if (peek().text == ",") {
                        take();
                        continue;
                    }
                    decl.table_values.push_back(number(take()));
                }
                expect(";");
            } else if (peek().text == "(") {
                take();
                std::vector<std::string> config;
                while (peek().text != ")") {
                    config.push_back(take().text);
                    if (peek().text == ",") take();
                }
                expect(")");
                std::vector<double> values;
                while (peek().text != ";") {
                    if (peek().text == ",") {
                        take();
                        continue;
                    }
                    values.push_back(number(take()));
                }
                expect(";");
                decl.rows.emplace_back(std::move(config), std::move(values));
            } else {
                fail("expected 'table' or a '(...)' configuration row");
            }
        }
        expect("}");
        probabilities_.push_back(std::move(decl));
    }

    DiscreteBayesNet assemble() {
        DiscreteBayesNet net;
        std::unordered_map<std::string, int> index;
        for (const auto& v : variables_) {
            if (index.count(v.name))
                throw parse_error("bif line " + std::to_string(v.line) + ": variable '" + v.name +
                                  "' declared twice");
            index[v.name] = static_cast<int>(net.names.size());
            net.names.push_back(v.name);
            net.cardinalities.push_back(static_cast<int>(v.states.size()));
            net.states.push_back(v.states);
        }
        const int n = net.n_nodes();
        if (n == 0) throw parse_error("bif: no variables declared");
        net.dag = PartiallyDirectedGraph(n);
        net.cpts.resize(static_cast<std::size_t>(n));

        std::vector<char> have_cpt(static_cast<std::size_t>(n), 0);
        for (const auto& p : probabilities_) {
            const auto child_it = index.find(p.child);
            if (child_it == index.end())
                throw parse_error("bif line " + std::to_string(p.line) + ": unknown variable '" +
                                  p.child + "'");
            const int child = child_it->second;
            if (have_cpt[static_cast<std::size_t>(child)])
                throw parse_error("bif line " + std::to_string(p.line) +
                                  ": duplicate probability block for '" + p.child + "'");
            have_cpt[static_cast<std::size_t>(child)] = 1;

            std::vector<int> declared_parents;
            for (const auto& name : p.parents) {
                const auto it = index.find(name);
                if (it == index.end())
                    throw parse_error("bif line " + std::to_string(p.line) +
                                      ": unknown parent '" + name + "'");
                if (it->second == child)
                    throw parse_error("bif line " + std::to_string(p.line) +
                                      ": variable cannot parent itself");
                declared_parents.push_back(it->second);
            }
            for (int par : declared_parents) {
                if (net.dag.has_directed(par, child))
                    throw parse_error("bif line " + std::to_string(p.line) +
                                      ": duplicate parent in block for '" + p.child + "'");
                net.dag.add_directed(par, child);
            }

            const int r = net.cardinalities[static_cast<std::size_t>(child)];
            long long q = 1;
            for (int par : declared_parents)
                q *= net.cardinalities[static_cast<std::size_t>(par)];
            std::vector<double> cpt(static_cast<std::size_t>(q) * static_cast<std::size_t>(r),
                                    -1.0);

            // Canonical parent order is ascending by node index; rows given
            // in declared order are re-indexed accordingly.
            std::vector<int> sorted_parents = declared_parents;
            std::sort(sorted_parents.begin(), sorted_parents.end());
            auto canonical_config = [&](const std::vector<int>& declared_codes) {
                long long cfg = 0;
                for (int sp : sorted_parents) {
                    std::size_t k = 0;
                    while (declared_parents[k] != sp) ++k;
                    cfg = cfg * net.cardinalities[static_cast<std::size_t>(sp)] +
                          declared_codes[k];
                }
                return cfg;
            };

            if (p.table_form) {
                if (!p.rows.empty())
                    throw parse_error("bif line " + std::to_string(p.line) +
                                      ": mixed 'table' and configuration rows");
                if (static_cast<long long>(p.table_values.size()) != q * r)
                    throw parse_error("bif line " + std::to_string(p.line) + ": 'table' for '" +
                                      p.child + "' lists " + std::to_string(p.table_values.size()) +
                                      " values, expected " + std::to_string(q * r));
                // Flattened order: parent configurations (declared parent
                // order, first parent most significant), child state fastest.
                for (long long dcfg = 0; dcfg < q; ++dcfg) {
                    std::vector<int> codes(declared_parents.size());
                    long long rest = dcfg;
                    for (std::size_t k = declared_parents.size(); k-- > 0;) {
                        const int card =
                            net.cardinalities[static_cast<std::size_t>(declared_parents[k])];
                        codes[k] = static_cast<int>(rest % card);
                        rest /= card;
                    }
                    const long long ccfg = canonical_config(codes);
                    for (int k = 0; k < r; ++k)
                        cpt[static_cast<std::size_t>(ccfg) * r + k] =
                            p.table_values[static_cast<std::size_t>(dcfg) * r + k];
                }
            } else {
                if (static_cast<long long>(p.rows.size()) != q)
                    throw parse_error("bif line " + std::to_string(p.line) + ": block for '" +
                                      p.child + "' has " + std::to_string(p.rows.size()) +
                                      " rows, expected " + std::to_string(q));
                for (const auto& [config_names, values] : p.rows) {
                    if (config_names.size() != declared_parents.size())
                        throw parse_error("bif line " + std::to_string(p.line) +
                                          ": configuration arity mismatch for '" + p.child + "'");
                    std::vector<int> codes(declared_parents.size());
                    for (std::size_t k = 0; k < declared_parents.size(); ++k) {
                        const auto& st =
                            net.states[static_cast<std::size_t>(declared_parents[k])];
                        const auto pos = std::find(st.begin(), st.end(), config_names[k]);
                        if (pos == st.end())
                            throw parse_error("bif line " + std::to_string(p.line) +
                                              ": unknown state '" + config_names[k] + "'");
                        codes[k] = static_cast<int>(pos - st.begin());
                    }
                    if (static_cast<int>(values.size()) != r)
                        throw parse_error("bif line " + std::to_string(p.line) + ": row for '" +
                                          p.child + "' lists " + std::to_string(values.size()) +
                                          " values, expected " + std::to_string(r));
                    const long long ccfg = canonical_config(codes);
                    if (cpt[static_cast<std::size_t>(ccfg) * r] >= 0.0)
                        throw parse_error("bif line " + std::to_string(p.line) +
                                          ": duplicate configuration row for '" + p.child + "'");
                    for (int k = 0; k < r; ++k)
                        cpt[static_cast<std::size_t>(ccfg) * r + k] = values[k];
                }
            }

            for (long long j = 0; j < q; ++j) {
                double sum = 0.0;
                for (int k = 0; k < r; ++k) {
                    const double v = cpt[static_cast<std::size_t>(j) * r + k];
                    if (v < 0.0)
                        throw parse_error("bif line " + std::to_string(p.line) +
                                          ": missing configuration row for '" + p.child + "'");
                    sum += v;
                }
                if (std::fabs(sum - 1.0) > 1e-6)
                    throw parse_error("bif line " + std::to_string(p.line) + ": CPT row of '" +
                                      p.child + "' sums to " + std::to_string(sum));
                for (int k = 0; k < r; ++k) cpt[static_cast<std::size_t>(j) * r + k] /= sum;
            }
            net.cpts[static_cast<std::size_t>(child)] = std::move(cpt);
        }

        for (int v = 0; v < n; ++v)
            if (!have_cpt[static_cast<std::size_t>(v)])
                throw parse_error("bif: no probability block for '" +
                                  net.names[static_cast<std::size_t>(v)] + "'");
        if (!directed_part_acyclic(net.dag))
            throw structural_error("bif: declared structure contains a directed cycle");
        net.validate();
        return net;
    }

    std::vector<BifToken> tokens_;
    std::size_t pos_ = 0;
    std::vector<VarDecl> variables_;
    std::vector<ProbDecl> probabilities_;
};

inline std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

} // namespace detail

/**
 * Reads a network from the supported BIF subset: a 'network' header,
 * 'variable' blocks with discrete state lists, and 'probability' blocks
 * holding either a flattened 'table' or one '(state, ...)' row per parent
 * configuration. '//' starts a comment. Rows whose sum is off by at most
 * 1e-6 are renormalized; anything worse is an error, as is any syntax
 * outside the subset.
 */
inline DiscreteBayesNet read_bif(std::istream& in) {
    detail::BifParser parser(detail::bif_tokenize(in));
    return parser.parse();
}

inline DiscreteBayesNet read_bif(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    return read_bif(in);
}

// Writes a network in the same subset; read_bif(write_bif(net)) reproduces
// the network to within 1e-9 in every probability.
inline void write_bif(const DiscreteBayesNet& net, std::ostream& out,
                      const std::vector<std::string>& comments = {}) {
    net.validate();
    for (const auto& c : comments) out << "// " << c << '\n';
    out << "network unknown {\n}\n";
    for (int v = 0; v < net.n_nodes(); ++v) {
        out << "variable " << net.names[static_cast<std::size_t>(v)] << " {\n";
        out << "  type discrete [ " << net.cardinalities[static_cast<std::size_t>(v)] << " ] { ";
        for (std::size_t k = 0; k < net.states[static_cast<std::size_t>(v)].size(); ++k) {
            if (k) out << ", ";
            out << net.states[static_cast<std::size_t>(v)][k];
        }
        out << " };\n}\n";
    }
    for (int v = 0; v < net.n_nodes(); ++v) {
        const auto parents = net.parents(v); // ascending == canonical order
        const int r = net.cardinalities[static_cast<std::size_t>(v)];
        out << "probability ( " << net.names[static_cast<std::size_t>(v)];
        if (!parents.empty()) {
            out << " | ";
            for (std::size_t k = 0; k < parents.size(); ++k) {
                if (k) out << ", ";
                out << net.names[static_cast<std::size_t>(parents[k])];
            }
        }
        out << " ) {\n";
        const long long q = net.config_count(v);
        if (parents.empty()) {
            out << "  table ";
            for (int k = 0; k < r; ++k) {
                if (k) out << ", ";
                out << detail::format_probability(net.cpts[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)]);
            }
            out << ";\n";
        } else {
            for (long long j = 0; j < q; ++j) {
                std::vector<int> codes(parents.size());
                long long rest = j;
                for (std::size_t k = parents.size(); k-- > 0;) {
                    const int card = net.cardinalities[static_cast<std::size_t>(parents[k])];
                    codes[k] = static_cast<int>(rest % card);
                    rest /= card;
                }
                out << "  (";
                for (std::size_t k = 0; k < parents.size(); ++k) {
                    if (k) out << ", ";
                    out << net.states[static_cast<std::size_t>(parents[k])]
                                     [static_cast<std::size_t>(codes[k])];
                }
                out << ") ";
                const double* row = net.cpt_row(v, j);
                for (int k = 0; k < r; ++k) {
                    if (k) out << ", ";
                    out << detail::format_probability(row[k]);
                }
                out << ";\n";
            }
        }
        out << "}\n";
    }
}

inline void write_bif(const DiscreteBayesNet& net, const std::string& path,
                      const std::vector<std::string>& comments = {}) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    write_bif(net, out, comments);
}

} // namespace mecip
