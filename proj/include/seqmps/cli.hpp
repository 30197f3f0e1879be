#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "error.hpp"
#include "fcs.hpp"
#include "format.hpp"
#include "jordan.hpp"
#include "mpo.hpp"
#include "mps.hpp"
#include "oracle.hpp"
#include "sequence.hpp"
#include "spec_document.hpp"
#include "statelib.hpp"

namespace seqmps {

namespace cli_detail {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NRange {
    std::size_t first = 0;
    std::size_t last = 0;
    bool single = true;
};

inline std::size_t parse_index(const std::string &text, const std::string &flag) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw UsageError(flag + ": expected a non-negative integer, got '" + text + "'");
    return value;
}

/// "A" or "A..B".
inline NRange parse_range(const std::string &text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const auto n = parse_index(text, "--n");
        return {n, n, true};
    }
    NRange r{parse_index(text.substr(0, dots), "--n"), parse_index(text.substr(dots + 2), "--n"), false};
    if (r.last < r.first)
        throw UsageError("--n: empty range '" + text + "'");
    return r;
}

class Session {
  public:
    Session(SpecDocument doc, std::optional<double> cluster_tol) : doc_(std::move(doc)), cluster_tol_(cluster_tol) {}

    Entity entity(const std::string &name) const {
        if (doc_.contains(name))
            return doc_.get(name);
        BuiltinName builtin;
        try {
            builtin = builtin_name(name);
        } catch (const Error &) {
            throw Error(ErrorKind::UnknownEntity, "no entity named '" + name + "'");
        }
        if (builtin == BuiltinName::LocalWindow)
            throw Error(ErrorKind::UnknownEntity, "local_window needs factors; declare it in a document");
        return build(BuiltinId{builtin, {}, {}, 2});
    }

    MpsState state(const std::string &name) const {
        auto e = entity(name);
        if (auto *s = std::get_if<MpsState>(&e))
            return *s;
        throw Error(ErrorKind::InvalidArgument, "'" + name + "' is an operator, expected a state");
    }

    MpoOperator op(const std::string &name) const {
        auto e = entity(name);
        if (auto *o = std::get_if<MpoOperator>(&e))
            return *o;
        throw Error(ErrorKind::InvalidArgument, "'" + name + "' is a state, expected an operator");
    }

    ClosedForm closed(const SequenceElement &f) const {
        if (cluster_tol_)
            return closed_form(f, *cluster_tol_);
        return closed_form(f);
    }

  private:
    SpecDocument doc_;
    std::optional<double> cluster_tol_;
};

/// An expression "norm S" | "overlap S T" | "expect S O" | "trace O".
struct Expression {
    std::string command;
    std::vector<std::string> names;
};

inline Expression parse_expression(const std::vector<std::string> &words) {
    std::vector<std::string> tokens;
    for (const auto &w : words) {
        std::istringstream in(w);
        std::string t;
        while (in >> t)
            tokens.push_back(t);
    }
    if (tokens.empty())
        throw UsageError("missing expression (norm S | overlap S T | expect S O | trace O)");
    Expression e{tokens.front(), {tokens.begin() + 1, tokens.end()}};
    std::size_t arity = 0;
    if (e.command == "norm" || e.command == "trace")
        arity = 1;
    else if (e.command == "overlap" || e.command == "expect")
        arity = 2;
    else
        throw UsageError("unknown expression '" + e.command + "'");
    if (e.names.size() != arity)
        throw UsageError("'" + e.command + "' takes " + std::to_string(arity) + " name(s)");
    return e;
}

inline ComparisonRequest request_for(const Session &s, const Expression &e) {
    if (e.command == "norm") {
        const auto x = s.state(e.names[0]);
        return inner_product_request(x, x);
    }
    if (e.command == "overlap")
        return inner_product_request(s.state(e.names[0]), s.state(e.names[1]));
    if (e.command == "expect")
        return expectation_request(s.state(e.names[0]), s.op(e.names[1]));
    return trace_request(s.op(e.names[0]));
}

inline SequenceElement sequence_for(const Session &s, const Expression &e) { return request_for(s, e).symbolic; }

inline void write_file(const std::string &path, const std::string &content) {
    std::ofstream file(path);
    if (!file)
        throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    file << content;
}

/// Prints one value for a single n, or "n value" rows for a range; optional CSV n,re,im.
template <typename Fn>
void print_values(std::ostream &out, const NRange &range, Fn value, const std::string &csv_path) {
    std::ostringstream csv;
    csv << "n,re,im\n";
    for (std::size_t n = range.first; n <= range.last; ++n) {
        std::optional<Complex> v;
        try {
            v = value(n);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::DivisionUndefined)
                throw;
        }
        const std::string text = v ? format_complex(*v) : "undefined";
        if (range.single)
            out << text << "\n";
        else
            out << n << " " << text << "\n";
        char buf[96];
        if (v)
            std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", n, v->real(), v->imag());
        else
            std::snprintf(buf, sizeof buf, "%zu,nan,nan\n", n);
        csv << buf;
    }
    if (!csv_path.empty())
        write_file(csv_path, csv.str());
}

inline std::string format_vector(const Vector &v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0)
            out += " ";
        out += format_complex(v(i));
    }
    return out + "]";
}

inline std::string read_file(const std::string &path) {
    std::ifstream file(path);
    if (!file)
        throw Error(ErrorKind::InvalidArgument, "cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

} // namespace cli_detail

/// Runs the command line (args exclude the program name). Returns 0 on
/// success, 1 on a domain error or failed check, 2 on a usage error.
inline int run_cli(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
    using namespace cli_detail;
    CLI::App app{"Sequence-valued matrix product states and operators"};
    app.name("seqmps");
    app.require_subcommand(1);

    std::string doc_path;
    std::optional<double> cluster_tol;
    app.add_option("--doc", doc_path, "Spec document with named states and operators");
    app.add_option("--cluster-tol", cluster_tol, "Eigenvalue clustering tolerance for closed forms");

    std::vector<std::string> names;
    std::vector<std::string> expr;
    std::string n_text;
    std::string csv_path;
    bool normalized = false;
    std::size_t n_max = 0;
    double tol = 1e-9;

    auto *norm = app.add_subcommand("norm", "Closed form of <S|S>");
    norm->add_option("S", names)->required()->expected(1);
    auto *overlap = app.add_subcommand("overlap", "Closed form of <S|T>");
    overlap->add_option("names", names)->required()->expected(2);
    auto *expect = app.add_subcommand("expect", "Closed form (or values) of <S|O|S>");
    expect->add_option("names", names)->required()->expected(2);
    expect->add_flag("--normalized", normalized, "Divide by <S|S> (0/0 := 0)");
    expect->add_option("--n", n_text, "Evaluate at N or over A..B instead of printing a closed form");
    expect->add_option("--csv", csv_path, "Write n,re,im table");
    auto *trace_cmd = app.add_subcommand("trace", "Closed form of tr O");
    trace_cmd->add_option("O", names)->required()->expected(1);
    auto *closed_cmd = app.add_subcommand("closed-form", "Closed form of an expression");
    closed_cmd->add_option("expr", expr)->required();
    auto *limit = app.add_subcommand("limit", "Asymptotic class of an expression");
    limit->add_option("expr", expr)->required();
    auto *eval_cmd = app.add_subcommand("eval", "Value table of an expression");
    eval_cmd->add_option("expr", expr)->required();
    eval_cmd->add_option("--n", n_text, "N or A..B")->required();
    eval_cmd->add_flag("--normalized", normalized, "Divide by the norm (expect only)");
    eval_cmd->add_option("--csv", csv_path, "Write n,re,im table");
    auto *verify = app.add_subcommand("verify", "Compare against dense contraction");
    verify->add_option("expr", expr)->required();
    verify->add_option("--n-max", n_max, "Largest chain length")->required();
    verify->add_option("--tol", tol, "Relative tolerance");
    verify->add_option("--csv", csv_path, "Write the comparison report");
    auto *fcs_check = app.add_subcommand("fcs-check", "Validate a density operator as an FCS candidate");
    fcs_check->add_option("D", names)->required()->expected(1);
    fcs_check->add_option("--tol", tol, "Residual tolerance");
    auto *derive = app.add_subcommand("derive-boundaries", "Boundaries from the dominant transfer eigenvectors");
    derive->add_option("S", names)->required()->expected(1);
    auto *pure = app.add_subcommand("purely-generated", "Isometry check of a state's site tensor");
    pure->add_option("S", names)->required()->expected(1);
    pure->add_option("--tol", tol, "Residual tolerance");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        SpecDocument doc;
        if (!doc_path.empty())
            doc = parse_spec(read_file(doc_path));
        const Session session(std::move(doc), cluster_tol);
        auto *cmd = app.get_subcommands().front();

        if (cmd == norm || cmd == overlap || cmd == trace_cmd || (cmd == expect && n_text.empty() && !normalized)) {
            Expression e{cmd->get_name(), names};
            out << format_closed_form(session.closed(sequence_for(session, e))) << "\n";
        } else if (cmd == expect) {
            const auto psi = session.state(names[0]);
            const auto o = session.op(names[1]);
            if (n_text.empty()) {
                const auto q = normalized_expectation(psi, o);
                out << "(" << format_closed_form(session.closed(q.num())) << ") / ("
                    << format_closed_form(session.closed(q.den())) << ")\n";
            } else if (normalized) {
                const auto q = normalized_expectation(psi, o);
                print_values(out, parse_range(n_text), [&](std::size_t n) { return q(n); }, csv_path);
            } else {
                const auto f = expectation(psi, o);
                print_values(out, parse_range(n_text), [&](std::size_t n) { return f(n); }, csv_path);
            }
        } else if (cmd == closed_cmd) {
            out << format_closed_form(session.closed(sequence_for(session, parse_expression(expr)))) << "\n";
        } else if (cmd == limit) {
            out << format_asymptotic(limit_behavior(session.closed(sequence_for(session, parse_expression(expr)))))
                << "\n";
        } else if (cmd == eval_cmd) {
            const auto e = parse_expression(expr);
            const auto range = parse_range(n_text);
            if (normalized) {
                if (e.command != "expect")
                    throw UsageError("--normalized applies to 'expect S O' only");
                const auto q = normalized_expectation(session.state(e.names[0]), session.op(e.names[1]));
                print_values(out, range, [&](std::size_t n) { return q(n); }, csv_path);
            } else {
                const auto f = sequence_for(session, e);
                print_values(out, range, [&](std::size_t n) { return f(n); }, csv_path);
            }
        } else if (cmd == verify) {
            const auto report = check_consistency(request_for(session, parse_expression(expr)), n_max, tol);
            if (!csv_path.empty())
                write_file(csv_path, report.to_csv());
            char buf[160];
            if (report.passed) {
                std::snprintf(buf, sizeof buf, "pass: n=0..%zu, max rel err %.3g <= %.3g\n", n_max,
                              report.max_rel_err(), tol);
                out << buf;
                return 0;
            }
            std::snprintf(buf, sizeof buf, "fail: first mismatch at n=%zu, max rel err %.3g > %.3g\n",
                          *report.first_failure(), report.max_rel_err(), tol);
            out << buf;
            return 1;
        } else if (cmd == fcs_check) {
            const auto v = validate_fcs(fcs_candidate(session.op(names[0])), tol);
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s: right residual %.6g, left residual %.6g\n",
                          v.passed ? "valid FCS" : "invalid FCS", v.right_residual, v.left_residual);
            out << buf;
            return v.passed ? 0 : 1;
        } else if (cmd == derive) {
            const auto result = derive_boundaries(session.state(names[0]).sites());
            if (!result.ok()) {
                out << to_string(*result.diagnostic) << ": dominant blocks";
                for (const auto &b : result.dominant_blocks)
                    out << " (" << format_complex(b.lambda) << ", size " << b.size << ")";
                out << "\n";
                return 0;
            }
            const auto &b = *result.boundaries;
            out << "dominant " << format_complex(b.dominant) << "\n";
            out << "left " << format_vector(b.left) << "\n";
            out << "right " << format_vector(b.right) << "\n";
        } else if (cmd == pure) {
            const auto check = is_purely_generated(IsometryTensor::from_sites(session.state(names[0]).sites()), tol);
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s: isometry residual %.6g\n",
                          check.isometry ? "purely generated" : "not purely generated", check.residual);
            out << buf;
            return check.isometry ? 0 : 1;
        }
        return 0;
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace seqmps
