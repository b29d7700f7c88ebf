#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <vector>

#include "lemni/errors.hpp"
#include "lemni/polynomial.hpp"
#include "lemni/roots.hpp"

namespace lemni {

struct QuadratureResult {
    cplx value{};
    double error_estimate = 0.0;
    long cells_used = 0;
    long singular_cells = 0;

    double real() const { return value.real(); }
};

struct QuadBudget {
    long max_cells = 400000;
    double target_rel_err = 5e-4;
};

/// The sublevel region E = {|p| < 1} with its bounding square
/// (root hull inflated by 2 per side; E always fits since cap(E) = 1).
struct RegionE {
    Polynomial p;
    RootSet roots;
    std::vector<cplx> dcoeffs; // p', for the Lipschitz exterior certificate
    double cx = 0.0, cy = 0.0, half = 0.0;

    explicit RegionE(Polynomial poly)
        : p(std::move(poly)), roots(find_roots(p)), dcoeffs(p.derivative_coeffs()) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& r : roots.roots) {
            xmin = std::min(xmin, r.location.real());
            xmax = std::max(xmax, r.location.real());
            ymin = std::min(ymin, r.location.imag());
            ymax = std::max(ymax, r.location.imag());
        }
        cx = 0.5 * (xmin + xmax);
        cy = 0.5 * (ymin + ymax);
        half = 0.5 * std::max(xmax - xmin, ymax - ymin) + 2.0;
    }

    bool contains(cplx z) const { return std::abs(p(z)) < 1.0; }
    double diameter() const { return 2.0 * half * M_SQRT2; }

    /// sup |p'| over the disk of radius r around the origin (coarse bound).
    double deriv_bound(double r) const { return detail::horner_scale(dcoeffs, r); }
};

namespace detail {

inline const double* gauss_nodes(int n) {
    static const double g5[] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                0.5384693101056831, 0.9061798459386640};
    static const double g3[] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double g8[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
    return n == 5 ? g5 : (n == 3 ? g3 : g8);
}

inline const double* gauss_weights(int n) {
    static const double w5[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                0.4786286704993665, 0.2369268850561891};
    static const double w3[] = {0.5555555555555556, 0.8888888888888889, 0.5555555555555556};
    static const double w8[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                0.2223810344533745, 0.1012285362903763};
    return n == 5 ? w5 : (n == 3 ? w3 : w8);
}

/// Tensor Gauss rule over the square [cx-h, cx+h] x [cy-h, cy+h].
template <typename F>
cplx gauss_square(const F& f, double cx, double cy, double h, int n) {
    const double* x = gauss_nodes(n);
    const double* w = gauss_weights(n);
    cplx sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sum += w[i] * w[j] * f(cplx(cx + h * x[i], cy + h * x[j]));
    return sum * (h * h);
}

/// Polar-triangle rule for a cell containing an integrable 1/|z - xi|
/// singularity: fan the square into 4 triangles with apex xi; the map
/// z = xi + u (E(v) - xi) has Jacobian u * J0, which cancels the 1/u blowup.
template <typename F>
cplx fan_square(const F& f, double cx, double cy, double h, cplx xi, int n) {
    const cplx corner[4] = {cplx(cx - h, cy - h), cplx(cx + h, cy - h), cplx(cx + h, cy + h),
                            cplx(cx - h, cy + h)};
    const double* x = gauss_nodes(n);
    const double* w = gauss_weights(n);
    cplx total = 0.0;
    for (int t = 0; t < 4; ++t) {
        const cplx a = corner[t], b = corner[(t + 1) % 4];
        const double j0 = std::abs((std::conj(a - xi) * (b - a)).imag());
        if (j0 < 1e-300) continue; // apex lies on this side
        cplx tri = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = 0.5 * (x[i] + 1.0); // map to (0,1)
            for (int j = 0; j < n; ++j) {
                const double v = 0.5 * (x[j] + 1.0);
                const cplx e = a + v * (b - a);
                tri += w[i] * w[j] * f(xi + u * (e - xi)) * u;
            }
        }
        total += tri * (0.25 * j0);
    }
    return total;
}

} // namespace detail

/// Adaptive integration of `integrand` over E. Cells straddling the boundary
/// are refined below boundary_h and counted at half weight; cells containing
/// a listed singularity use the polar fan rule.
inline QuadratureResult integrate_over_E(const RegionE& region,
                                         const std::function<cplx(cplx)>& integrand,
                                         const RootSet& singularities, QuadBudget budget = {}) {
    enum class Kind { interior, straddle, exterior, singular, suspect };

    struct Cell {
        double cx, cy, h; // center and half-side
        Kind kind = Kind::exterior;
        bool must_refine = false;
        bool alive = true;
        cplx val{};
        double err = 0.0;
    };

    const double boundary_h = 1e-3 * region.diameter();
    const Polynomial& p = region.p;

    std::vector<cplx> sing_pts;
    for (const auto& s : singularities.roots) sing_pts.push_back(s.location);

    auto classify_eval = [&](Cell& c) {
        const double h = c.h;
        int inside = 0;
        double min_abs = 1e300;
        const cplx probes[5] = {cplx(c.cx - h, c.cy - h), cplx(c.cx + h, c.cy - h),
                                cplx(c.cx + h, c.cy + h), cplx(c.cx - h, c.cy + h),
                                cplx(c.cx, c.cy)};
        for (const auto& z : probes) {
            const double a = std::abs(p(z));
            min_abs = std::min(min_abs, a);
            if (a < 1.0) ++inside;
        }

        auto in_cell = [&](cplx z) {
            return z.real() >= c.cx - h && z.real() < c.cx + h && z.imag() >= c.cy - h &&
                   z.imag() < c.cy + h;
        };
        const cplx* xi = nullptr;
        int xi_count = 0;
        for (const auto& s : sing_pts)
            if (in_cell(s)) {
                xi = &s;
                ++xi_count;
            }

        const double diam = 2.0 * h * M_SQRT2;
        if (inside == 5) {
            if (xi_count > 1) {
                c.kind = Kind::singular;
                c.must_refine = true; // separate the singularities first
                c.val = 0.0;
                c.err = 0.0;
                return;
            }
            if (xi_count == 1) {
                c.kind = Kind::singular;
                if (diam > 4.0 * boundary_h) {
                    c.must_refine = true;
                    c.val = 0.0;
                    c.err = 0.0;
                    return;
                }
                const cplx v5 = detail::fan_square(integrand, c.cx, c.cy, h, *xi, 5);
                const cplx v8 = detail::fan_square(integrand, c.cx, c.cy, h, *xi, 8);
                c.val = v8;
                c.err = std::abs(v8 - v5);
                return;
            }
            c.kind = Kind::interior;
            const cplx v5 = detail::gauss_square(integrand, c.cx, c.cy, h, 5);
            const cplx v3 = detail::gauss_square(integrand, c.cx, c.cy, h, 3);
            c.val = v5;
            c.err = std::abs(v5 - v3);
            return;
        }
        if (inside == 0) {
            // droppable only when provably outside E: samples plus a
            // Lipschitz bound on |p'| must push |p| above 1 on the whole cell
            const double reach = std::hypot(std::abs(c.cx) + h, std::abs(c.cy) + h);
            const double lip = region.deriv_bound(reach);
            if (min_abs - lip * h * M_SQRT2 > 1.0) {
                c.kind = Kind::exterior;
                c.val = 0.0;
                c.err = 0.0;
                return;
            }
            if (diam >= boundary_h) {
                c.kind = Kind::suspect; // cannot certify yet: refine, never weigh in
                c.must_refine = true;
                c.val = 0.0;
                c.err = 0.0;
                return;
            }
            // at the size floor, settle it with a denser membership probe
            bool any_inside = false;
            for (int i = 0; i < 5 && !any_inside; ++i)
                for (int j = 0; j < 5 && !any_inside; ++j) {
                    const cplx z(c.cx + h * (i - 2) / 2.0, c.cy + h * (j - 2) / 2.0);
                    if (std::abs(p(z)) < 1.0) any_inside = true;
                }
            if (!any_inside) {
                c.kind = Kind::exterior;
                c.val = 0.0;
                c.err = 0.0;
                return;
            }
            c.kind = Kind::straddle;
            const cplx v5 = detail::gauss_square(integrand, c.cx, c.cy, h, 5);
            c.val = 0.5 * v5;
            c.err = 0.5 * std::abs(v5);
            return;
        }
        c.kind = Kind::straddle;
        if (diam >= boundary_h) {
            c.must_refine = true;
            c.val = 0.0;
            c.err = 0.0;
            return;
        }
        // half weight; the weight uncertainty is the whole half-value
        const cplx v5 = detail::gauss_square(integrand, c.cx, c.cy, h, 5);
        c.val = 0.5 * v5;
        c.err = 0.5 * std::abs(v5);
    };

    std::vector<Cell> cells;
    cells.reserve(4096);
    auto push_cell = [&](double cx, double cy, double h) {
        Cell c;
        c.cx = cx;
        c.cy = cy;
        c.h = h;
        classify_eval(c);
        cells.push_back(c);
        return cells.size() - 1;
    };

    // priority: forced refinements first, then largest error; index breaks ties
    using Entry = std::pair<double, std::size_t>;
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> queue(cmp);

    auto enqueue = [&](std::size_t idx) {
        const Cell& c = cells[idx];
        if (c.kind == Kind::exterior && !c.must_refine) return;
        const double priority = c.must_refine ? 1e300 : c.err;
        if (priority > 0.0) queue.push({priority, idx});
    };

    cplx total = 0.0;
    double total_err = 0.0;
    long n_evaluated = 1;
    {
        const std::size_t root_idx = push_cell(region.cx, region.cy, region.half);
        total = cells[root_idx].val;
        total_err = cells[root_idx].err;
        enqueue(root_idx);
    }

    const double h_floor = 1e-9 * region.half;
    while (!queue.empty()) {
        const double target_abs = budget.target_rel_err * std::max(std::abs(total), 1.0);
        if (queue.top().first < 1e300 && total_err <= target_abs) break;
        if (n_evaluated >= budget.max_cells) break;

        const auto [prio, idx] = queue.top();
        queue.pop();
        if (!cells[idx].alive) continue;
        if (cells[idx].h * 0.5 < h_floor) continue; // cannot split further

        Cell parent = cells[idx];
        cells[idx].alive = false;
        total -= parent.val;
        total_err -= parent.err;

        const double h2 = 0.5 * parent.h;
        const double offs[4][2] = {{-h2, -h2}, {h2, -h2}, {-h2, h2}, {h2, h2}};
        for (const auto& o : offs) {
            const std::size_t child = push_cell(parent.cx + o[0], parent.cy + o[1], h2);
            total += cells[child].val;
            total_err += cells[child].err;
            enqueue(child);
            ++n_evaluated;
        }
    }

    bool forced_left = false;
    while (!queue.empty()) {
        if (queue.top().first >= 1e300 && cells[queue.top().second].alive) forced_left = true;
        queue.pop();
    }

    // canonical final summation: leaves in a fixed geometric order, Kahan
    std::vector<std::size_t> leaves;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].alive && cells[i].kind != Kind::exterior && cells[i].kind != Kind::suspect)
            leaves.push_back(i);
    std::sort(leaves.begin(), leaves.end(), [&](std::size_t a, std::size_t b) {
        if (cells[a].h != cells[b].h) return cells[a].h > cells[b].h;
        if (cells[a].cx != cells[b].cx) return cells[a].cx < cells[b].cx;
        return cells[a].cy < cells[b].cy;
    });

    QuadratureResult out;
    cplx sum = 0.0, comp = 0.0;
    double esum = 0.0;
    for (const auto i : leaves) {
        const cplx y = cells[i].val - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        esum += cells[i].err;
        if (cells[i].kind == Kind::singular) ++out.singular_cells;
    }
    out.value = sum;
    out.error_estimate = esum;
    out.cells_used = static_cast<long>(leaves.size());

    const double target_abs = budget.target_rel_err * std::max(std::abs(out.value), 1.0);
    if (forced_left || (n_evaluated >= budget.max_cells && esum > 10.0 * target_abs))
        throw budget_exhausted_error("integrate_over_E: cell budget exhausted", out.value.real(),
                                     esum);
    return out;
}

namespace detail {

/// Jet-based integrand pieces with a nudge off exact poles (measure zero;
/// only reachable if a quadrature node lands on a root).
inline JetValue safe_jet(const Polynomial& p, cplx z) {
    JetValue j = eval_jet_coeffs(p.coeffs(), z);
    if (std::abs(j.p) < 1e-250 || (p.degree() >= 2 && std::abs(j.dp) < 1e-250))
        j = eval_jet_coeffs(p.coeffs(), z + cplx(1e-12, 1e-12));
    return j;
}

} // namespace detail

/// Marks results whose integrand had a singularity within 1e-10 of the
/// curve itself (extremal candidates); error estimate widened x3.
inline bool singularity_on_curve(const Polynomial& p, const RootSet& xi) {
    for (const auto& s : xi.roots)
        if (std::abs(std::abs(p(s.location)) - 1.0) <= 1e-10) return true;
    return false;
}

/// |L| via the Stokes identity with the unimodular extension:
/// |L| = Re Integral_E (|phi|/phi) (phi - psi) dA, phi = p'/p, psi = p''/p'.
inline QuadratureResult length_area_v1(const Polynomial& p, QuadBudget budget = {}) {
    const RegionE region(p);
    const RootSet crit = find_critical_points(p);
    const RootSet xi = combined_root_set(region.roots, crit);

    auto integrand = [&p](cplx z) -> cplx {
        const JetValue j = detail::safe_jet(p, z);
        const cplx phi = j.dp / j.p;
        const double aphi = std::abs(phi);
        if (aphi < 1e-250) return cplx(0.0);
        // (|phi|/phi) * (phi - psi); psi = p''/p'
        const cplx psi = p.degree() >= 2 ? j.ddp / j.dp : cplx(0.0);
        return (aphi / phi) * (phi - psi);
    };

    QuadratureResult r = integrate_over_E(region, integrand, xi, budget);
    if (singularity_on_curve(p, xi)) r.error_estimate *= 3.0;
    return r;
}

/// |L| via the second extension (factor |p|):
/// |L| = Re Integral_E [ 2|p'| - (|p'|/phi) psi ] dA; singular only at zeta.
inline QuadratureResult length_area_v2(const Polynomial& p, QuadBudget budget = {}) {
    const RegionE region(p);
    const RootSet crit = find_critical_points(p);

    auto integrand = [&p](cplx z) -> cplx {
        const JetValue j = detail::safe_jet(p, z);
        const double adp = std::abs(j.dp);
        if (p.degree() == 1) return cplx(2.0 * adp);
        const cplx phi = j.dp / j.p;
        if (std::abs(phi) < 1e-250) return cplx(2.0 * adp);
        const cplx psi = j.ddp / j.dp;
        return 2.0 * adp - (adp / phi) * psi;
    };

    QuadratureResult r = integrate_over_E(region, integrand, crit, budget);
    if (singularity_on_curve(p, combined_root_set(region.roots, crit))) r.error_estimate *= 3.0;
    return r;
}

struct PushforwardCheck {
    QuadratureResult energy; // Integral_E |p'|^2 dA, must equal pi n
    QuadratureResult mass;   // Integral_E |p'| dA, must be <= pi sqrt(n)
    double expected_energy = 0.0;
    bool energy_ok = false;
    bool cauchy_ok = false;
};

/// The pushforward identity Integral_E |p'|^2 = pi n (p covers the disk n
/// times) plus the Cauchy-Schwarz corollary Integral_E |p'| <= pi sqrt(n).
inline PushforwardCheck pushforward_check(const Polynomial& p, QuadBudget budget = {}) {
    const RegionE region(p);
    const RootSet none{};
    PushforwardCheck out;
    out.energy = integrate_over_E(
        region, [&p](cplx z) { return cplx(std::norm(detail::safe_jet(p, z).dp)); }, none, budget);
    out.mass = integrate_over_E(
        region, [&p](cplx z) { return cplx(std::abs(detail::safe_jet(p, z).dp)); }, none, budget);
    out.expected_energy = M_PI * p.degree();
    const double tol = std::max(0.01 * out.expected_energy, 3.0 * out.energy.error_estimate);
    out.energy_ok = std::abs(out.energy.real() - out.expected_energy) <= tol;
    out.cauchy_ok =
        out.mass.real() <= M_PI * std::sqrt(p.degree()) + 3.0 * out.mass.error_estimate;
    return out;
}

struct AreaCheck {
    QuadratureResult area;
    bool polya_ok = false;
};

/// A(E) <= pi, the capacity (Polya) bound; equality for p = z^n.
inline AreaCheck area_capacity_check(const Polynomial& p, QuadBudget budget = {}) {
    const RegionE region(p);
    const RootSet none{};
    AreaCheck out;
    out.area = integrate_over_E(
        region, [](cplx) { return cplx(1.0); }, none, budget);
    const double rel = out.area.error_estimate / std::max(out.area.real(), 1e-300);
    out.polya_ok = out.area.real() <= M_PI * (1.0 + 3.0 * rel);
    return out;
}

/// Integral_E sum_xi 1/|z - xi| dA: the singular mass that bounds |L| in the
/// simplest estimate (<= (2n-1) * 2 pi when all xi lie in the unit-capacity E).
inline QuadratureResult singular_mass(const Polynomial& p, const RegionE& region,
                                      QuadBudget budget = {}) {
    const RootSet crit = find_critical_points(p);
    const RootSet xi = combined_root_set(region.roots, crit);

    auto integrand = [&xi](cplx z) -> cplx {
        double sum = 0.0;
        for (const auto& s : xi.roots) {
            const double d = std::abs(z - s.location);
            sum += s.multiplicity / std::max(d, 1e-300);
        }
        return cplx(sum);
    };
    QuadratureResult r = integrate_over_E(region, integrand, xi, budget);
    if (singularity_on_curve(p, xi)) r.error_estimate *= 3.0;
    return r;
}

} // namespace lemni
