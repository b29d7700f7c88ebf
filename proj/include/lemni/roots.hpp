#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lemni/errors.hpp"
#include "lemni/polynomial.hpp"

namespace lemni {

enum class RootKind { of_p, of_p_prime, of_pp_combined };

struct Root {
    cplx location;
    int multiplicity = 1;
};

/// All roots of a polynomial (or of its derivative), with multiple roots
/// clustered and reported once with their summed multiplicity.
struct RootSet {
    std::vector<Root> roots;
    RootKind kind = RootKind::of_p;
    double residual_bound = 0.0;

    int total_multiplicity() const {
        int m = 0;
        for (const auto& r : roots) m += r.multiplicity;
        return m;
    }
    double max_abs() const {
        double m = 0.0;
        for (const auto& r : roots) m = std::max(m, std::abs(r.location));
        return m;
    }
};

namespace detail {

inline int effective_degree(const std::vector<cplx>& c) {
    int d = static_cast<int>(c.size()) - 1;
    const double scale = std::max(1e-300, horner_scale(c, 1.0));
    while (d > 0 && std::abs(c[static_cast<std::size_t>(d)]) < 1e-15 * scale) --d;
    return d;
}

/// One simultaneous-iteration sweep (Aberth–Ehrlich). Returns max update size.
inline double aberth_sweep(const std::vector<cplx>& c, std::vector<cplx>& z) {
    const std::size_t m = z.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const JetValue j = eval_jet_coeffs(c, z[i]);
        const double scale = horner_scale(c, std::abs(z[i]));
        if (std::abs(j.p) <= 1e-16 * scale) continue; // converged to working precision
        if (std::abs(j.dp) == 0.0) {
            z[i] += cplx(1e-8, 1e-8);
            worst = std::max(worst, 1e-8);
            continue;
        }
        const cplx ratio = j.p / j.dp;
        cplx repel = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            const cplx d = z[i] - z[k];
            if (std::abs(d) > 1e-300) repel += 1.0 / d;
        }
        const cplx denom = 1.0 - ratio * repel;
        const cplx step = std::abs(denom) > 1e-300 ? ratio / denom : ratio;
        z[i] -= step;
        worst = std::max(worst, std::abs(step));
    }
    return worst;
}

inline std::vector<cplx> companion_eigen_roots(const std::vector<cplx>& c, int deg) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(deg, deg);
    const cplx lead = c[static_cast<std::size_t>(deg)];
    for (int i = 1; i < deg; ++i) m(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) m(i, deg - 1) = -c[static_cast<std::size_t>(i)] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
    std::vector<cplx> out(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    return out;
}

/// Newton polish; keeps the new iterate only while the residual improves.
inline void polish_roots(const std::vector<cplx>& c, std::vector<cplx>& z) {
    for (auto& zi : z) {
        for (int it = 0; it < 3; ++it) {
            const JetValue j = eval_jet_coeffs(c, zi);
            if (std::abs(j.dp) < 1e-300) break;
            const cplx cand = zi - j.p / j.dp;
            if (std::abs(eval_coeffs(c, cand)) < std::abs(j.p))
                zi = cand;
            else
                break;
        }
    }
}

} // namespace detail

/// Complex roots with multiplicities of an arbitrary coefficient list
/// (ascending powers, need not be monic). Simultaneous iteration with Newton
/// polishing, falling back to companion-matrix eigenvalues when it stalls.
inline RootSet find_roots(const std::vector<cplx>& coeffs, double tol = 1e-10,
                          RootKind kind = RootKind::of_p) {
    if (tol <= 0.0) throw std::invalid_argument("find_roots: tol must be positive");
    const int deg = detail::effective_degree(coeffs);
    if (deg < 1) throw std::invalid_argument("find_roots: degree must be at least 1");
    std::vector<cplx> c(coeffs.begin(), coeffs.begin() + deg + 1);

    // Cauchy bound gives the start circle; the angular offset breaks the
    // rotational symmetry of polynomials like z^n - 1.
    double cauchy = 0.0;
    for (int k = 0; k < deg; ++k)
        cauchy = std::max(cauchy, std::abs(c[static_cast<std::size_t>(k)] / c[static_cast<std::size_t>(deg)]));
    const double r0 = 1.0 + cauchy;
    std::vector<cplx> z(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) {
        const double angle = 2.0 * M_PI * (static_cast<double>(i) + 0.25) / deg + 0.43;
        const double radius = r0 * (0.6 + 0.25 * static_cast<double>(i % 3));
        z[static_cast<std::size_t>(i)] = std::polar(radius, angle);
    }

    double upd = 1.0;
    for (int it = 0; it < 240 && upd > 1e-14 * (1.0 + r0); ++it)
        upd = detail::aberth_sweep(c, z);
    detail::polish_roots(c, z);

    auto worst_residual = [&](const std::vector<cplx>& pts) {
        double w = 0.0;
        for (const auto& zi : pts) w = std::max(w, std::abs(detail::eval_coeffs(c, zi)));
        return w;
    };

    if (worst_residual(z) > tol) {
        auto ze = detail::companion_eigen_roots(c, deg);
        detail::polish_roots(c, ze);
        if (worst_residual(ze) < worst_residual(z)) z = ze;
    }
    if (worst_residual(z) > tol)
        throw nonconvergence_error("find_roots: residual " + std::to_string(worst_residual(z)) +
                                   " above tolerance after fallback");

    // Cluster multiple roots. A merge of clusters with total size m is allowed
    // within radius max(1e-7, tol^{1/m}) and only if the residual at the merged
    // centroid stays below tol; the residual gate is what keeps genuinely
    // distinct roots (e.g. the 64th roots of unity) apart.
    struct Cluster {
        cplx centroid;
        int size;
    };
    std::vector<Cluster> clusters;
    clusters.reserve(z.size());
    for (const auto& zi : z) clusters.push_back({zi, 1});

    const double scale1 = std::max(1.0, r0);
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
                const int m = clusters[i].size + clusters[j].size;
                const double radius =
                    std::max(1e-7 * scale1, std::pow(tol, 1.0 / static_cast<double>(m)));
                if (std::abs(clusters[i].centroid - clusters[j].centroid) > radius) continue;
                const cplx centroid = (clusters[i].centroid * static_cast<double>(clusters[i].size) +
                                       clusters[j].centroid * static_cast<double>(clusters[j].size)) /
                                      static_cast<double>(m);
                if (std::abs(detail::eval_coeffs(c, centroid)) > tol) continue;
                clusters[i] = {centroid, m};
                clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }

    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.centroid.real() != b.centroid.real()) return a.centroid.real() < b.centroid.real();
        return a.centroid.imag() < b.centroid.imag();
    });

    RootSet out;
    out.kind = kind;
    for (const auto& cl : clusters) {
        out.roots.push_back({cl.centroid, cl.size});
        out.residual_bound = std::max(out.residual_bound, std::abs(detail::eval_coeffs(c, cl.centroid)));
    }
    if (out.residual_bound > tol)
        throw nonconvergence_error("find_roots: clustered residual above tolerance");
    return out;
}

inline RootSet find_roots(const Polynomial& p, double tol = 1e-10) {
    return find_roots(p.coeffs(), tol, RootKind::of_p);
}

/// Roots of p'. Degree-1 polynomials have no critical points.
inline RootSet find_critical_points(const Polynomial& p, double tol = 1e-10) {
    if (p.degree() == 1) {
        RootSet empty;
        empty.kind = RootKind::of_p_prime;
        return empty;
    }
    return find_roots(p.derivative_coeffs(), tol, RootKind::of_p_prime);
}

/// Roots of p*p' as one set: multiplicities add where a root of p is also a
/// critical point (a root of multiplicity m contributes m + (m-1)).
inline RootSet combined_root_set(const RootSet& of_p, const RootSet& of_p_prime) {
    RootSet out;
    out.kind = RootKind::of_pp_combined;
    out.roots = of_p.roots;
    out.residual_bound = std::max(of_p.residual_bound, of_p_prime.residual_bound);
    for (const auto& zeta : of_p_prime.roots) {
        bool found = false;
        for (auto& r : out.roots) {
            if (std::abs(r.location - zeta.location) <= 1e-7) {
                r.multiplicity += zeta.multiplicity;
                found = true;
                break;
            }
        }
        if (!found) out.roots.push_back(zeta);
    }
    return out;
}

} // namespace lemni
