#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "closed_form.hpp"
#include "jordan.hpp"
#include "types.hpp"

namespace seqmps {

namespace detail {

inline std::string format_real(double x) {
    if (x == 0.0)
        x = 0.0; // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    std::string s = buf;
    if (s == "-0")
        s = "0";
    return s;
}

} // namespace detail

/// 12 significant digits; `re` when the imaginary part is negligible, else `re+imi`.
inline std::string format_complex(Complex z) {
    const double scale = 1e-12 * std::max(1.0, std::abs(z));
    double re = std::abs(z.real()) <= scale ? 0.0 : z.real();
    double im = std::abs(z.imag()) <= scale ? 0.0 : z.imag();
    if (im == 0.0)
        return detail::format_real(re);
    std::string out = detail::format_real(re);
    out += im < 0.0 ? "-" : "+";
    out += detail::format_real(std::abs(im));
    out += "i";
    return out;
}

namespace detail {

inline std::string format_factor(Complex z) {
    const std::string s = format_complex(z);
    if (s.find('i') != std::string::npos)
        return "(" + s + ")";
    return s;
}

} // namespace detail

/// Human-readable closed form, e.g. `1·n^2·(1)^n + -2·n^1·(1)^n + 3·δ(n,0)`.
inline std::string format_closed_form(const ClosedForm &cf) {
    const ClosedForm ordered = canonical_order(cf);
    std::string out;
    auto append = [&](const std::string &term) {
        if (!out.empty())
            out += " + ";
        out += term;
    };
    for (const auto &t : ordered.exp_terms) {
        for (std::size_t k = t.poly.size(); k-- > 0;) {
            if (format_complex(t.poly[k]) == "0")
                continue;
            append(detail::format_factor(t.poly[k]) + "·n^" + std::to_string(k) + "·(" + format_complex(t.lambda) +
                   ")^n");
        }
    }
    for (const auto &d : ordered.delta_terms)
        if (format_complex(d.coeff) != "0")
            append(detail::format_factor(d.coeff) + "·δ(n," + std::to_string(d.location) + ")");
    return out.empty() ? "0" : out;
}

inline std::string format_asymptotic(const AsymptoticClass &a) {
    std::string out = to_string(a.kind);
    if (a.kind == GrowthKind::PolynomialGrowth)
        out += "(" + std::to_string(a.degree) + ")";
    else if (a.kind == GrowthKind::ExponentialGrowth)
        out += "(" + detail::format_real(a.modulus) + ", " + std::to_string(a.degree) + ")";
    if (a.oscillatory)
        out += " oscillatory";
    return out;
}

} // namespace seqmps
