#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "mpo.hpp"
#include "mps.hpp"
#include "statelib.hpp"
#include "types.hpp"

namespace seqmps {

/// Named states and operators declared in a spec document.
///
/// Format (UTF-8, line oriented, `#` starts a comment):
///
///     state cat = builtin(cat)
///     operator zz = builtin(local_window, Z | Z)
///
///     [state w2]
///     d = 2
///     m = 2
///     L = 1 0
///     R = 0 1
///     M(0) = 1 0; 0 1
///     M(1) = 0 1; 0 0
///
/// Operator sections use keys M(i,j). Complex literals: `a`, `bi`, `a+bi`.
struct SpecDocument {
    std::map<std::string, Entity> entities;
    std::vector<std::string> order;

    bool contains(const std::string &name) const { return entities.count(name) != 0; }

    const Entity &get(const std::string &name) const {
        auto it = entities.find(name);
        if (it == entities.end())
            throw Error(ErrorKind::UnknownEntity, "no entity named '" + name + "'");
        return it->second;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return value;
}

} // namespace detail

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
inline std::optional<Complex> parse_complex(std::string_view token) {
    token = detail::trim(token);
    if (token.empty())
        return std::nullopt;
    if (token.back() != 'i') {
        auto re = detail::parse_double(token);
        if (!re)
            return std::nullopt;
        return Complex{*re, 0.0};
    }
    std::string_view body = token.substr(0, token.size() - 1);
    std::size_t split = std::string_view::npos;
    for (std::size_t p = body.size(); p-- > 1;) {
        if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
            split = p;
            break;
        }
    }
    auto imag_part = [](std::string_view s) -> std::optional<double> {
        if (s.empty() || s == "+")
            return 1.0;
        if (s == "-")
            return -1.0;
        return detail::parse_double(s);
    };
    if (split == std::string_view::npos) {
        auto im = imag_part(body);
        if (!im)
            return std::nullopt;
        return Complex{0.0, *im};
    }
    auto re = detail::parse_double(body.substr(0, split));
    auto im = imag_part(body.substr(split));
    if (!re || !im)
        return std::nullopt;
    return Complex{*re, *im};
}

namespace detail {

struct SourceLine {
    std::size_t number;
    std::string text; // comment stripped, untrimmed
};

class SpecParser {
  public:
    explicit SpecParser(const std::string &text) {
        std::istringstream in(text);
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            lines_.push_back({number, line});
        }
    }

    SpecDocument parse() {
        SpecDocument doc;
        std::size_t i = 0;
        while (i < lines_.size()) {
            const auto &line = lines_[i];
            const std::string_view body = trim(line.text);
            if (body.empty()) {
                ++i;
                continue;
            }
            if (body.front() == '[') {
                i = parse_section(doc, i);
                continue;
            }
            parse_declaration(doc, line);
            ++i;
        }
        return doc;
    }

  private:
    std::vector<SourceLine> lines_;

    static std::size_t column_of(const SourceLine &line, std::string_view part) {
        return static_cast<std::size_t>(part.data() - line.text.data()) + 1;
    }

    static void add_entity(SpecDocument &doc, const std::string &name, Entity entity, const SourceLine &line) {
        if (doc.contains(name))
            throw ParseError(line.number, 1, "duplicate entity '" + name + "'");
        doc.entities.emplace(name, std::move(entity));
        doc.order.push_back(name);
    }

    static bool valid_name(std::string_view name) {
        if (name.empty())
            return false;
        for (char c : name)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
                return false;
        return true;
    }

    static Complex complex_token(const SourceLine &line, std::string_view token) {
        auto z = parse_complex(token);
        if (!z)
            throw ParseError(line.number, column_of(line, token),
                             "bad complex literal '" + std::string(token) + "'");
        return *z;
    }

    static std::vector<std::string_view> split_ws(std::string_view s) {
        std::vector<std::string_view> out;
        std::size_t p = 0;
        while (p < s.size()) {
            while (p < s.size() && (s[p] == ' ' || s[p] == '\t'))
                ++p;
            const std::size_t start = p;
            while (p < s.size() && s[p] != ' ' && s[p] != '\t')
                ++p;
            if (p > start)
                out.push_back(s.substr(start, p - start));
        }
        return out;
    }

    static std::vector<std::string_view> split_on(std::string_view s, char sep) {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        for (std::size_t p = 0; p <= s.size(); ++p) {
            if (p == s.size() || s[p] == sep) {
                out.push_back(s.substr(start, p - start));
                start = p + 1;
            }
        }
        return out;
    }

    static std::vector<Complex> parse_row(const SourceLine &line, std::string_view s) {
        std::vector<Complex> out;
        for (auto token : split_ws(s))
            out.push_back(complex_token(line, token));
        return out;
    }

    /// Rows separated by ';'; must be rectangular.
    static Matrix parse_matrix(const SourceLine &line, std::string_view s, const std::string &entity) {
        const std::string_view t = trim(s);
        if (t == "I" || t == "X" || t == "Y" || t == "Z") {
            if (t == "I")
                return pauli::identity();
            if (t == "X")
                return pauli::x();
            if (t == "Y")
                return pauli::y();
            return pauli::z();
        }
        std::vector<std::vector<Complex>> rows;
        for (auto part : split_on(s, ';'))
            rows.push_back(parse_row(line, part));
        const std::size_t cols = rows.front().size();
        if (cols == 0)
            throw ParseError(line.number, column_of(line, s), "empty matrix row");
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (rows[r].size() != cols)
                throw Error(ErrorKind::ValidationError,
                            "entity '" + entity + "' (line " + std::to_string(line.number) + "): matrix row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                                     " entries, expected " + std::to_string(cols));
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        return m;
    }

    // kind name = builtin(args)
    void parse_declaration(SpecDocument &doc, const SourceLine &line) {
        const std::string_view body = trim(line.text);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line.number, column_of(line, body), "expected 'state NAME = builtin(...)' or a [section]");
        const auto head = split_ws(body.substr(0, eq));
        if (head.size() != 2 || (head[0] != "state" && head[0] != "operator"))
            throw ParseError(line.number, column_of(line, body), "declaration must start with 'state' or 'operator' and a name");
        if (!valid_name(head[1]))
            throw ParseError(line.number, column_of(line, head[1]), "invalid entity name '" + std::string(head[1]) + "'");
        const std::string_view rhs = trim(body.substr(eq + 1));
        if (rhs.substr(0, 8) != "builtin(" || rhs.back() != ')')
            throw ParseError(line.number, column_of(line, rhs), "expected builtin(...)");
        const std::string_view inner = rhs.substr(8, rhs.size() - 9);
        const auto comma = inner.find(',');
        const std::string_view builtin = trim(inner.substr(0, comma));
        const std::string_view params = comma == std::string_view::npos ? std::string_view{} : trim(inner.substr(comma + 1));

        const std::string name(head[1]);
        BuiltinId id{};
        try {
            id.name = builtin_name(builtin);
        } catch (const Error &) {
            throw Error(ErrorKind::ValidationError, "entity '" + name + "' (line " + std::to_string(line.number) +
                                                        "): unknown builtin '" + std::string(builtin) + "'");
        }
        if (!params.empty()) {
            switch (id.name) {
            case BuiltinName::Product:
                id.amplitudes = parse_row(line, params);
                break;
            case BuiltinName::Field:
                id.matrices.push_back(parse_matrix(line, params, name));
                break;
            case BuiltinName::LocalWindow:
                for (auto part : split_on(params, '|'))
                    id.matrices.push_back(parse_matrix(line, part, name));
                break;
            case BuiltinName::IdentityOp: {
                const auto z = complex_token(line, params);
                if (z.imag() != 0.0 || z.real() < 2.0 || z.real() != std::floor(z.real()))
                    throw Error(ErrorKind::ValidationError, "entity '" + name + "': identity_op needs an integer d >= 2");
                id.phys_dim = static_cast<std::size_t>(z.real());
                break;
            }
            default:
                throw Error(ErrorKind::ValidationError, "entity '" + name + "': builtin '" + std::string(builtin) +
                                                            "' takes no parameters");
            }
        }
        Entity entity = [&]() -> Entity {
            try {
                return build(id);
            } catch (const Error &e) {
                throw Error(ErrorKind::ValidationError, "entity '" + name + "': " + e.what());
            }
        }();
        const bool is_state = std::holds_alternative<MpsState>(entity);
        if (is_state != (head[0] == "state"))
            throw Error(ErrorKind::ValidationError, "entity '" + name + "': builtin '" + std::string(builtin) +
                                                        "' is " + (is_state ? "a state" : "an operator") +
                                                        ", declared as " + std::string(head[0]));
        add_entity(doc, name, std::move(entity), line);
    }

    std::size_t parse_section(SpecDocument &doc, std::size_t index) {
        const SourceLine &header = lines_[index];
        const std::string_view body = trim(header.text);
        if (body.back() != ']')
            throw ParseError(header.number, column_of(header, body), "unterminated section header");
        const auto parts = split_ws(body.substr(1, body.size() - 2));
        if (parts.size() != 2 || (parts[0] != "state" && parts[0] != "operator"))
            throw ParseError(header.number, column_of(header, body), "section header must be [state NAME] or [operator NAME]");
        if (!valid_name(parts[1]))
            throw ParseError(header.number, column_of(header, parts[1]), "invalid entity name");
        const bool is_state = parts[0] == "state";
        const std::string name(parts[1]);
        auto fail = [&](const std::string &why) {
            return Error(ErrorKind::ValidationError, "entity '" + name + "': " + why);
        };

        std::optional<std::size_t> d, m;
        std::optional<std::vector<Complex>> left, right;
        std::map<std::pair<std::size_t, std::size_t>, Matrix> sites;
        std::size_t i = index + 1;
        for (; i < lines_.size(); ++i) {
            const auto &line = lines_[i];
            const std::string_view text = trim(line.text);
            if (text.empty())
                continue;
            if (text.front() == '[')
                break;
            const auto eq = text.find('=');
            if (eq == std::string_view::npos) {
                // a one-line declaration ends the section
                if (text.substr(0, 6) == "state " || text.substr(0, 9) == "operator ")
                    break;
                throw ParseError(line.number, column_of(line, text), "expected key = value");
            }
            const std::string_view key = trim(text.substr(0, eq));
            const std::string_view value = trim(text.substr(eq + 1));
            if (key.substr(0, 6) == "state " || key.substr(0, 9) == "operator ")
                break;
            if (key == "d" || key == "m") {
                const auto z = complex_token(line, value);
                if (z.imag() != 0.0 || z.real() < 1.0 || z.real() != std::floor(z.real()))
                    throw ParseError(line.number, column_of(line, value), std::string(key) + " must be a positive integer");
                auto &slot = key == "d" ? d : m;
                if (slot)
                    throw ParseError(line.number, column_of(line, key), "duplicate key '" + std::string(key) + "'");
                slot = static_cast<std::size_t>(z.real());
            } else if (key == "L" || key == "R") {
                auto &slot = key == "L" ? left : right;
                if (slot)
                    throw ParseError(line.number, column_of(line, key), "duplicate key '" + std::string(key) + "'");
                slot = parse_row(line, value);
            } else if (key.size() > 3 && key.substr(0, 2) == "M(" && key.back() == ')') {
                const auto idx = split_on(key.substr(2, key.size() - 3), ',');
                if (idx.size() != (is_state ? 1U : 2U))
                    throw fail("key '" + std::string(key) + "' needs " + (is_state ? "one symbol" : "a symbol pair"));
                std::pair<std::size_t, std::size_t> symbols{0, 0};
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    const auto z = parse_complex(idx[k]);
                    if (!z || z->imag() != 0.0 || z->real() < 0.0 || z->real() != std::floor(z->real()))
                        throw ParseError(line.number, column_of(line, key), "bad symbol in '" + std::string(key) + "'");
                    (k == 0 ? symbols.first : symbols.second) = static_cast<std::size_t>(z->real());
                }
                if (sites.count(symbols))
                    throw ParseError(line.number, column_of(line, key), "duplicate key '" + std::string(key) + "'");
                sites.emplace(symbols, parse_matrix(line, value, name));
            } else {
                throw fail("unknown key '" + std::string(key) + "' (line " + std::to_string(line.number) + ")");
            }
        }

        const std::size_t phys = d.value_or(2);
        if (phys < 2)
            throw fail("d must be at least 2");
        if (!m)
            throw fail("missing key 'm'");
        if (!left || !right)
            throw fail("missing boundary L or R");
        if (left->size() != *m || right->size() != *m)
            throw fail("L and R must have length m=" + std::to_string(*m));
        const std::size_t expected = is_state ? phys : phys * phys;
        if (sites.size() != expected)
            throw fail("expected " + std::to_string(expected) + " site matrices, got " + std::to_string(sites.size()));
        std::vector<Matrix> ordered;
        for (std::size_t a = 0; a < phys; ++a) {
            for (std::size_t b = 0; b < (is_state ? 1U : phys); ++b) {
                auto it = sites.find({a, b});
                if (it == sites.end())
                    throw fail("site key for symbol " + std::to_string(a) + (is_state ? "" : "," + std::to_string(b)) +
                               " is missing or out of range");
                if (static_cast<std::size_t>(it->second.rows()) != *m || static_cast<std::size_t>(it->second.cols()) != *m)
                    throw fail("site matrix for symbol " + std::to_string(a) + (is_state ? "" : "," + std::to_string(b)) +
                               " is " + std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
                               ", expected " + std::to_string(*m) + "x" + std::to_string(*m));
                ordered.push_back(it->second);
            }
        }
        Vector l(static_cast<Eigen::Index>(*m)), r(static_cast<Eigen::Index>(*m));
        for (std::size_t k = 0; k < *m; ++k) {
            l(static_cast<Eigen::Index>(k)) = (*left)[k];
            r(static_cast<Eigen::Index>(k)) = (*right)[k];
        }
        if (is_state)
            add_entity(doc, name, MpsState(l, std::move(ordered), r), header);
        else
            add_entity(doc, name, MpoOperator(phys, l, std::move(ordered), r), header);
        return i;
    }
};

} // namespace detail

inline SpecDocument parse_spec(const std::string &text) { return detail::SpecParser(text).parse(); }

} // namespace seqmps
