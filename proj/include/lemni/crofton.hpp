#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lemni/errors.hpp"
#include "lemni/parallel.hpp"
#include "lemni/polynomial.hpp"
#include "lemni/rng.hpp"
#include "lemni/tracer.hpp"

namespace lemni {

/// A line in normal coordinates: z(t) = rho e^{i theta} + t i e^{i theta}.
/// The foot point rho e^{i theta} is the closest point to the origin.
/// Gamma_w (the line through w perpendicular to w) is LineCoord(arg w, |w|).
struct LineCoord {
    double theta = 0.0; // in [0, pi)
    double rho = 0.0;   // signed offset

    cplx point(double t) const { return std::polar(1.0, theta) * cplx(rho, t); }

    static LineCoord through_perpendicular(cplx w) {
        double th = std::arg(w);
        double r = std::abs(w);
        if (th < 0.0) {
            th += M_PI;
            r = -r;
        }
        if (th >= M_PI) {
            th -= M_PI;
            r = -r;
        }
        return {th, r};
    }
};

/// Intersection counter over lines plus its a-priori degree bound
/// (n for Re-curves, 2n for modulus curves).
struct CountField {
    std::function<int(const LineCoord&)> counter;
    int max_count = 0;
};

namespace detail {

/// Coefficients (in t) of q(t) = poly(z(t)) along a line.
inline std::vector<cplx> restrict_to_line(const std::vector<cplx>& coeffs, const LineCoord& line) {
    const cplx dir = std::polar(1.0, line.theta);
    const cplx base = dir * line.rho;
    const cplx slope = dir * cplx(0.0, 1.0);
    // Horner in polynomial arithmetic: r(t) <- r(t) * (base + slope t) + c_k
    std::vector<cplx> r{coeffs.back()};
    for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
        std::vector<cplx> next(r.size() + 1, cplx(0.0));
        for (std::size_t i = 0; i < r.size(); ++i) {
            next[i] += r[i] * base;
            next[i + 1] += r[i] * slope;
        }
        next[0] += coeffs[k];
        r = std::move(next);
    }
    return r;
}

/// Real coefficients of Re q(t) for real t.
inline std::vector<double> real_part_poly(const std::vector<cplx>& c) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

/// Real coefficients of |q(t)|^2 for real t (conj-convolution).
inline std::vector<double> modulus_squared_poly(const std::vector<cplx>& c) {
    std::vector<double> out(2 * c.size() - 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
            out[i + j] += (c[i] * std::conj(c[j])).real();
    return out;
}

/// Sturm chain with max-norm rescaling after each division. Counts distinct
/// real roots in (a, b]. A leading coefficient that vanished under the
/// normalization signals a degenerate line (the caller resamples); degree
/// drops inside the remainder sequence are ordinary gcd behavior.
class SturmChain {
public:
    explicit SturmChain(std::vector<double> poly, double degenerate_tol = 1e-12) {
        const int nominal = static_cast<int>(poly.size()) - 1;
        normalize(poly);
        const int deg = trim_degree(poly, degenerate_tol);
        if (deg < nominal)
            throw degenerate_line_error("sturm: leading coefficient below tolerance");
        if (deg < 0) throw degenerate_line_error("sturm: zero polynomial");
        poly.resize(static_cast<std::size_t>(deg) + 1);
        chain_.push_back(poly);
        if (deg == 0) return;

        std::vector<double> d(static_cast<std::size_t>(deg));
        for (int k = 1; k <= deg; ++k) d[static_cast<std::size_t>(k - 1)] = poly[static_cast<std::size_t>(k)] * k;
        normalize(d);
        chain_.push_back(d);

        while (chain_.back().size() > 1) {
            const auto& a = chain_[chain_.size() - 2];
            const auto& b = chain_.back();
            std::vector<double> rem = remainder(a, b, degenerate_tol);
            const int rdeg = trim_degree(rem, degenerate_tol);
            if (rdeg < 0) break; // common factor: chain ends at the gcd
            rem.resize(static_cast<std::size_t>(rdeg) + 1);
            for (auto& x : rem) x = -x;
            normalize(rem);
            chain_.push_back(std::move(rem));
        }
    }

    int count_in(double a, double b) const {
        if (a >= b) return 0;
        return sign_changes(a) - sign_changes(b);
    }

private:
    static void normalize(std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        if (m > 0.0)
            for (double& x : v) x /= m;
    }

    static int trim_degree(const std::vector<double>& v, double tol) {
        int d = static_cast<int>(v.size()) - 1;
        while (d >= 0 && std::abs(v[static_cast<std::size_t>(d)]) < tol) --d;
        return d;
    }

    static std::vector<double> remainder(std::vector<double> a, const std::vector<double>& b,
                                         double tol) {
        const int db = static_cast<int>(b.size()) - 1;
        const double lead = b.back();
        if (std::abs(lead) < tol) throw degenerate_line_error("sturm: degenerate divisor");
        for (int da = static_cast<int>(a.size()) - 1; da >= db; --da) {
            const double q = a[static_cast<std::size_t>(da)] / lead;
            for (int k = 0; k <= db; ++k)
                a[static_cast<std::size_t>(da - db + k)] -= q * b[static_cast<std::size_t>(k)];
            a[static_cast<std::size_t>(da)] = 0.0;
        }
        a.resize(static_cast<std::size_t>(std::max(db, 1)));
        return a;
    }

    int sign_changes(double x) const {
        int changes = 0, prev = 0;
        for (const auto& poly : chain_) {
            double v = 0.0;
            for (std::size_t k = poly.size(); k-- > 0;) v = v * x + poly[k];
            const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
            if (s != 0) {
                if (prev != 0 && s != prev) ++changes;
                prev = s;
            }
        }
        return changes;
    }

    std::vector<std::vector<double>> chain_;
};

} // namespace detail

/// Distinct real zeros of t -> Re f(z(t)) in [-window, window].
inline int line_count_realpart(const Polynomial& f, const LineCoord& line, double window) {
    if (window <= 0.0) throw std::invalid_argument("line_count_realpart: window must be positive");
    const auto q = detail::real_part_poly(detail::restrict_to_line(f.coeffs(), line));
    detail::SturmChain chain(q);
    return chain.count_in(-window - 1e-12 * (1.0 + window), window);
}

/// Distinct real zeros of t -> Re f(z(t)) over the whole line, using the
/// restricted polynomial's own Cauchy bound (near-parallel lines place
/// intersections arbitrarily far out).
inline int line_count_realpart_full(const Polynomial& f, const LineCoord& line) {
    auto q = detail::real_part_poly(detail::restrict_to_line(f.coeffs(), line));
    double m = 0.0;
    for (double x : q) m = std::max(m, std::abs(x));
    if (m > 0.0)
        for (double& x : q) x /= m;
    int deg = static_cast<int>(q.size()) - 1;
    while (deg > 0 && std::abs(q[static_cast<std::size_t>(deg)]) < 1e-12) --deg;
    if (deg <= 0) throw degenerate_line_error("line_count_realpart_full: degenerate restriction");
    double cauchy = 0.0;
    for (int k = 0; k < deg; ++k)
        cauchy = std::max(cauchy, std::abs(q[static_cast<std::size_t>(k)] /
                                           q[static_cast<std::size_t>(deg)]));
    const double bound = 2.0 * (1.0 + cauchy);
    detail::SturmChain chain(q);
    return chain.count_in(-bound, bound);
}

/// Distinct real zeros of t -> |p(z(t))|^2 - 1 in [-window, window].
inline int line_count_modulus(const Polynomial& p, const LineCoord& line, double window) {
    if (window <= 0.0) throw std::invalid_argument("line_count_modulus: window must be positive");
    auto q = detail::modulus_squared_poly(detail::restrict_to_line(p.coeffs(), line));
    q[0] -= 1.0;
    detail::SturmChain chain(q);
    return chain.count_in(-window - 1e-12 * (1.0 + window), window);
}

/// Sign changes of theta -> Re f(rho e^{i theta}) over [0, 2 pi), refined
/// until the count is stable under two doublings.
inline int circle_count_realpart(const Polynomial& f, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("circle_count_realpart: rho must be positive");
    auto count_at = [&](int n) {
        int changes = 0, prev = 0;
        for (int i = 0; i <= n; ++i) { // wraps around to close the sweep
            const double theta = 2.0 * M_PI * (i % n) / n;
            const double v = f(std::polar(rho, theta)).real();
            const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
            if (s == 0) continue;
            if (prev != 0 && s != prev) ++changes;
            prev = s;
        }
        return changes;
    };
    int n = std::max(64, 16 * f.degree());
    int c0 = count_at(n), c1 = count_at(2 * n), c2 = count_at(4 * n);
    while (!(c0 == c1 && c1 == c2)) {
        n *= 2;
        if (n > (1 << 22))
            throw instability_error("circle_count_realpart: counts kept changing under refinement");
        c0 = c1;
        c1 = c2;
        c2 = count_at(4 * n);
    }
    return c2;
}

/// Sampler configuration: deterministic (theta, rho) grid or Monte Carlo.
/// CLI spec strings: "grid:<n_theta>x<n_rho>" or "mc:<n>:<seed>".
struct SamplerSpec {
    enum class Kind { grid, mc } kind = Kind::grid;
    int n_theta = 1000;
    int n_rho = 1000;
    long n_lines = 1000000;
    std::uint64_t seed = 1;

    static SamplerSpec parse(const std::string& s) {
        SamplerSpec out;
        if (s.rfind("grid:", 0) == 0) {
            const auto x = s.find('x', 5);
            if (x == std::string::npos) throw std::invalid_argument("sampler: expected grid:NxM");
            out.kind = Kind::grid;
            out.n_theta = std::stoi(s.substr(5, x - 5));
            out.n_rho = std::stoi(s.substr(x + 1));
            if (out.n_theta < 1 || out.n_rho < 1)
                throw std::invalid_argument("sampler: grid sizes must be positive");
            return out;
        }
        if (s.rfind("mc:", 0) == 0) {
            const auto c = s.find(':', 3);
            out.kind = Kind::mc;
            if (c == std::string::npos) {
                out.n_lines = std::stol(s.substr(3));
            } else {
                out.n_lines = std::stol(s.substr(3, c - 3));
                out.seed = std::stoull(s.substr(c + 1));
            }
            if (out.n_lines < 1) throw std::invalid_argument("sampler: line count must be positive");
            return out;
        }
        throw std::invalid_argument("sampler: expected grid:NxM or mc:N:SEED");
    }
};

/// Cauchy-Crofton length of the curve inside D_R:
/// length = (1/2) Integral_0^pi Integral_R n(theta, rho) drho dtheta.
/// Degenerate lines (Sturm breakdown) are resampled with a tiny offset.
inline std::pair<double, double> crofton_length(const CountField& field, double window_disk_r,
                                                const SamplerSpec& sampler = {}) {
    const double R = window_disk_r;
    if (R <= 0.0) throw std::invalid_argument("crofton_length: window radius must be positive");

    auto robust_count = [&](double theta, double rho) -> long {
        for (int attempt = 0; attempt < 6; ++attempt) {
            try {
                const int c = field.counter(LineCoord{theta, rho});
                if (c > field.max_count)
                    throw numerical_error("crofton_length: count exceeded the degree bound");
                return c;
            } catch (const degenerate_line_error&) {
                theta = std::fmod(theta + 3.7e-7, M_PI);
                rho += 5.3e-7 * R;
            }
        }
        throw degenerate_line_error("crofton_length: degenerate line persisted after resampling");
    };

    if (sampler.kind == SamplerSpec::Kind::grid) {
        auto grid_estimate = [&](int nt, int nr) {
            std::vector<double> per_theta(static_cast<std::size_t>(nt), 0.0);
            parallel_for(static_cast<std::size_t>(nt), [&](std::size_t it) {
                const double theta = M_PI * (static_cast<double>(it) + 0.5) / nt;
                long sum = 0;
                for (int ir = 0; ir < nr; ++ir) {
                    const double rho = -R + 2.0 * R * (ir + 0.5) / nr;
                    sum += robust_count(theta, rho);
                }
                per_theta[it] = static_cast<double>(sum);
            });
            double total = 0.0;
            for (const double s : per_theta) total += s;
            return 0.5 * total * (M_PI / nt) * (2.0 * R / nr);
        };
        const double full = grid_estimate(sampler.n_theta, sampler.n_rho);
        const double coarse = grid_estimate(std::max(1, sampler.n_theta / 2),
                                            std::max(1, sampler.n_rho / 2));
        return {full, std::abs(full - coarse)};
    }

    const long n = sampler.n_lines;
    std::vector<long> counts(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        RandomStream rng(sampler.seed, i);
        const double theta = rng.uniform(0.0, M_PI);
        const double rho = rng.uniform(-R, R);
        counts[i] = robust_count(theta, rho);
    });
    double sum = 0.0, sum2 = 0.0;
    for (const long c : counts) {
        sum += static_cast<double>(c);
        sum2 += static_cast<double>(c) * static_cast<double>(c);
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
    const double measure = M_PI * 2.0 * R; // (theta, rho) area
    const double length = 0.5 * measure * mean;
    const double stderr_len = 0.5 * measure * std::sqrt(var / static_cast<double>(n));
    return {length, stderr_len};
}

/// Counter for the modulus curve {|p| = 1} restricted to chords of D_R.
inline CountField modulus_count_field(const Polynomial& p, double window_disk_r) {
    const double R = window_disk_r;
    return CountField{[p, R](const LineCoord& line) -> int {
                          if (std::abs(line.rho) >= R) return 0;
                          const double half_chord =
                              std::sqrt(std::max(0.0, R * R - line.rho * line.rho));
                          auto q = detail::modulus_squared_poly(
                              detail::restrict_to_line(p.coeffs(), line));
                          q[0] -= 1.0;
                          detail::SturmChain chain(q);
                          return chain.count_in(-half_chord, half_chord);
                      },
                      2 * p.degree()};
}

/// Counter for the real-part curve {Re f = 0} restricted to chords of D_R.
inline CountField realpart_count_field(const Polynomial& f, double window_disk_r) {
    const double R = window_disk_r;
    return CountField{[f, R](const LineCoord& line) -> int {
                          if (std::abs(line.rho) >= R) return 0;
                          const double half_chord =
                              std::sqrt(std::max(0.0, R * R - line.rho * line.rho));
                          const auto q = detail::real_part_poly(
                              detail::restrict_to_line(f.coeffs(), line));
                          detail::SturmChain chain(q);
                          return chain.count_in(-half_chord, half_chord);
                      },
                      f.degree()};
}

/// The deficiency integral of the Poincare-formula argument, truncated to
/// an annulus: Integral [n - #(L~ intersect Gamma_w)] dA(w) / (2|w|), >= 0.
/// Monte Carlo with counter-based streams; (value, stderr).
inline std::pair<double, double> deficiency_integral(const Polynomial& f, double r_inner,
                                                     double r_outer, long n_samples = 20000,
                                                     std::uint64_t seed = 1) {
    if (!(0.0 < r_inner && r_inner < r_outer))
        throw std::invalid_argument("deficiency_integral: need 0 < r_inner < r_outer");
    const int n = f.degree();

    std::vector<double> vals(static_cast<std::size_t>(n_samples));
    std::vector<char> overflow(static_cast<std::size_t>(n_samples), 0);
    parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
        RandomStream rng(seed, i);
        cplx w = rng.uniform_annulus(r_inner, r_outer);
        for (int attempt = 0;; ++attempt) {
            try {
                const int count =
                    line_count_realpart_full(f, LineCoord::through_perpendicular(w));
                if (count > n) {
                    overflow[i] = 2; // degree bound violated: hard failure
                    return;
                }
                vals[i] = static_cast<double>(n - count) / (2.0 * std::abs(w));
                return;
            } catch (const degenerate_line_error&) {
                if (attempt >= 5) {
                    overflow[i] = 1;
                    return;
                }
                w *= std::polar(1.0, 1.3e-6);
            }
        }
    });

    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (overflow[i] == 2)
            throw numerical_error("deficiency_integral: a line count exceeded the degree bound");
        if (overflow[i] == 1)
            throw degenerate_line_error("deficiency_integral: degenerate-line resample overflow");
        if (vals[i] < 0.0)
            throw numerical_error("deficiency_integral: negative integrand (count excess)");
    }

    const double area = M_PI * (r_outer * r_outer - r_inner * r_inner);
    double sum = 0.0, sum2 = 0.0;
    for (const double v : vals) {
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n_samples);
    const double var = std::max(0.0, sum2 / static_cast<double>(n_samples) - mean * mean);
    return {area * mean, area * std::sqrt(var / static_cast<double>(n_samples))};
}

/// The 2nr length budget of one normalized polynomial's real-part curve:
/// f = z^n + a_2 z^{n-2} + ... + a_n (a_n real, max |a_k| = 1):
/// |L~ intersect D_r| <= 2 n r with a strictly positive gap, by two methods.
struct RealpartBoundReport {
    double traced_length = 0.0;
    double crofton_len = 0.0;
    double crofton_stderr = 0.0;
    double bound_2nr = 0.0;
    double gap = 0.0;
    int circle_count_r = 0;  // #(L~ intersect T_r), expected >= 2n
    int max_line_count = 0;  // max over sampled lines, expected <= n
    bool ok = false;
};

inline RealpartBoundReport realpart_bound_check(const Polynomial& f, double r,
                                 const SamplerSpec& sampler = SamplerSpec{}) {
    if (r < 2.0) throw std::invalid_argument("realpart_bound_check: needs r >= 2");
    const int n = f.degree();
    {
        const auto& c = f.coeffs();
        if (std::abs(c[static_cast<std::size_t>(n - 1)]) > 1e-9)
            throw std::invalid_argument("realpart_bound_check: coefficient of z^(n-1) must vanish");
        if (std::abs(c[0].imag()) > 1e-9)
            throw std::invalid_argument("realpart_bound_check: a_n must be real");
        double maxa = 0.0;
        for (int k = 0; k <= n - 2; ++k) maxa = std::max(maxa, std::abs(c[static_cast<std::size_t>(k)]));
        if (std::abs(maxa - 1.0) > 1e-9)
            throw std::invalid_argument("realpart_bound_check: max |a_k| must equal 1");
    }

    RealpartBoundReport out;
    out.bound_2nr = 2.0 * n * r;
    out.traced_length = realpart_curve_length(f, r);

    auto observed_max = std::make_shared<std::atomic<int>>(0);
    CountField base = realpart_count_field(f, r);
    CountField watched{[base, observed_max](const LineCoord& line) {
                           const int c = base.counter(line);
                           int cur = observed_max->load();
                           while (c > cur && !observed_max->compare_exchange_weak(cur, c)) {
                           }
                           return c;
                       },
                       base.max_count};
    auto [clen, cstderr] = crofton_length(watched, r, sampler);
    out.crofton_len = clen;
    out.crofton_stderr = cstderr;
    out.max_line_count = observed_max->load();
    out.circle_count_r = circle_count_realpart(f, r);
    out.gap = out.bound_2nr - out.traced_length;
    out.ok = out.traced_length <= out.bound_2nr && out.crofton_len <= out.bound_2nr &&
             out.gap > 0.0 && out.circle_count_r >= 2 * n && out.max_line_count <= n;
    return out;
}

} // namespace lemni
