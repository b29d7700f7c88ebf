#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lemni/errors.hpp"

namespace lemni {

using cplx = std::complex<double>;

/// Floor under |p(z)| (or |p'(z)|) below which quotient evaluations refuse
/// to divide and raise pole_error instead of returning a huge value.
inline constexpr double kPoleFloor = 1e-13;

/// Values of p, p', p'' at one point, from a single fused Horner pass.
struct JetValue {
    cplx p{};
    cplx dp{};
    cplx ddp{};
};

namespace detail {

/// Fused Horner evaluation of a coefficient list (ascending powers).
inline JetValue eval_jet_coeffs(const std::vector<cplx>& c, cplx z) {
    JetValue j;
    if (c.empty()) return j;
    j.p = c.back();
    for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) {
        j.ddp = j.ddp * z + 2.0 * j.dp;
        j.dp = j.dp * z + j.p;
        j.p = j.p * z + c[static_cast<std::size_t>(k)];
    }
    return j;
}

inline cplx eval_coeffs(const std::vector<cplx>& c, cplx z) {
    cplx v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
    return v;
}

inline std::vector<cplx> derivative_coeffs(const std::vector<cplx>& c) {
    if (c.size() <= 1) return {cplx(0.0)};
    std::vector<cplx> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
    return d;
}

inline std::vector<cplx> multiply_coeffs(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> r(a.size() + b.size() - 1, cplx(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

/// Scale of the coefficients seen by Horner at |z|; used for the backward
/// stable stopping criterion in the root finder.
inline double horner_scale(const std::vector<cplx>& c, double abs_z) {
    double s = 0.0, p = 1.0;
    for (const auto& ck : c) {
        s += std::abs(ck) * p;
        p *= abs_z;
    }
    return s;
}

} // namespace detail

/// Monic complex polynomial, coefficients stored in ascending powers with
/// the leading 1 explicit.
class Polynomial {
public:
    explicit Polynomial(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.size() < 2)
            throw std::invalid_argument("Polynomial: degree must be at least 1");
        if (coeffs_.back() != cplx(1.0, 0.0))
            throw std::invalid_argument("Polynomial: leading coefficient must be exactly 1");
        for (const auto& c : coeffs_)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw std::invalid_argument("Polynomial: coefficients must be finite");
    }

    /// z^n + c_{n-1} z^{n-1} + ... + c_0 from the non-leading coefficients.
    static Polynomial from_lower_coeffs(std::vector<cplx> lower) {
        lower.push_back(cplx(1.0));
        return Polynomial(std::move(lower));
    }

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }

    cplx operator()(cplx z) const { return detail::eval_coeffs(coeffs_, z); }

    std::vector<cplx> derivative_coeffs() const { return detail::derivative_coeffs(coeffs_); }
    std::vector<cplx> second_derivative_coeffs() const {
        return detail::derivative_coeffs(detail::derivative_coeffs(coeffs_));
    }

    bool operator==(const Polynomial& other) const { return coeffs_ == other.coeffs_; }

private:
    std::vector<cplx> coeffs_;
};

/// p(z), p'(z), p''(z) in one pass.
inline JetValue eval_jet(const Polynomial& p, cplx z) {
    return detail::eval_jet_coeffs(p.coeffs(), z);
}

/// Logarithmic derivative p'/p; equals the sum of 1/(z - root) over roots.
inline cplx phi(const Polynomial& p, cplx z) {
    const JetValue j = eval_jet(p, z);
    if (std::abs(j.p) < kPoleFloor)
        throw pole_error("phi: |p(z)| below pole floor (z is at or near a root of p)");
    return j.dp / j.p;
}

/// p''/p'; equals the sum of 1/(z - critical point).
inline cplx psi(const Polynomial& p, cplx z) {
    const JetValue j = eval_jet(p, z);
    if (std::abs(j.dp) < kPoleFloor)
        throw pole_error("psi: |p'(z)| below pole floor (z is at or near a critical point)");
    return j.ddp / j.dp;
}

namespace detail {

inline std::vector<cplx> tail_family_coeffs(int n, const std::vector<cplx>& a) {
    if (n < 2) throw std::invalid_argument("family: n must be >= 2");
    if (static_cast<int>(a.size()) == n)
        throw std::invalid_argument("family: a_1 must not be supplied (coefficients start at a_2)");
    if (static_cast<int>(a.size()) != n - 1)
        throw std::invalid_argument("family: expected coefficients a_2..a_n");
    if (a.back().imag() != 0.0)
        throw std::invalid_argument("family: a_n must be real");
    // a_k multiplies z^{n-k}; the z^{n-1} slot stays exactly 0.
    std::vector<cplx> c(static_cast<std::size_t>(n) + 1, cplx(0.0));
    c[static_cast<std::size_t>(n)] = 1.0;
    for (int k = 2; k <= n; ++k) c[static_cast<std::size_t>(n - k)] = a[static_cast<std::size_t>(k - 2)];
    return c;
}

} // namespace detail

/// z^n + a_2 z^{n-2} + ... + a_n  (the normalized class: no z^{n-1} term,
/// real constant term).
inline Polynomial tail_family(int n, const std::vector<cplx>& a) {
    return Polynomial(detail::tail_family_coeffs(n, a));
}

/// z^n - 1 + a_2 z^{n-2} + ... + a_n, the perturbations of p_0 = z^n - 1.
inline Polynomial perturbed_family(int n, const std::vector<cplx>& a) {
    auto c = detail::tail_family_coeffs(n, a);
    c[0] -= 1.0;
    return Polynomial(std::move(c));
}

/// Monic polynomial with the given roots (multiplicities by repetition).
inline Polynomial polynomial_from_roots(const std::vector<cplx>& roots) {
    std::vector<cplx> c{cplx(1.0)};
    for (const auto& r : roots) c = detail::multiply_coeffs(c, {-r, cplx(1.0)});
    return Polynomial(std::move(c));
}

/// The smallness scale a = max_k |a_k|^{1/k} of a perturbation (k runs from 2).
inline double scale_param(const std::vector<cplx>& a) {
    if (a.empty()) throw std::invalid_argument("scale_param: no coefficients supplied");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double k = static_cast<double>(i + 2);
        s = std::max(s, std::pow(std::abs(a[i]), 1.0 / k));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Text format: "n; re(c_0),im(c_0); ...; re(c_n),im(c_n)"
// ---------------------------------------------------------------------------

inline Polynomial parse_polynomial(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ';') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() < 2) throw std::invalid_argument("polynomial text: expected 'n; re,im; ...'");

    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };

    int n = 0;
    {
        std::istringstream in(trim(parts[0]));
        if (!(in >> n) || n < 1) throw std::invalid_argument("polynomial text: bad degree field");
    }
    if (static_cast<int>(parts.size()) != n + 2)
        throw std::invalid_argument("polynomial text: expected " + std::to_string(n + 1) +
                                    " coefficient pairs for degree " + std::to_string(n));

    std::vector<cplx> coeffs;
    coeffs.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        std::string field = trim(parts[static_cast<std::size_t>(k) + 1]);
        const auto comma = field.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("polynomial text: coefficient must be 're,im'");
        double re = 0.0, im = 0.0;
        try {
            re = std::stod(field.substr(0, comma));
            im = std::stod(field.substr(comma + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("polynomial text: bad float in coefficient " + std::to_string(k));
        }
        coeffs.emplace_back(re, im);
    }
    if (coeffs.back() != cplx(1.0, 0.0))
        throw std::invalid_argument("polynomial text: polynomial must be monic (c_n = 1)");
    return Polynomial(std::move(coeffs));
}

inline std::string format_polynomial(const Polynomial& p) {
    char buf[64];
    std::string out = std::to_string(p.degree());
    for (const auto& c : p.coeffs()) {
        std::snprintf(buf, sizeof(buf), "; %.17g,%.17g", c.real(), c.imag());
        out += buf;
    }
    return out;
}

} // namespace lemni
