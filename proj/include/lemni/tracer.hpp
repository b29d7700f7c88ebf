#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lemni/errors.hpp"
#include "lemni/polynomial.hpp"
#include "lemni/roots.hpp"

namespace lemni {

/// Knobs of the predictor-corrector step controller. All length-like values
/// scale with `scale` = 1 + max |root|.
struct StepControl {
    double scale = 1.0;
    double base_h = 0.008;      // h = base_h * scale / (1 + curvature)
    double h_min_factor = 1e-5; // clamp range per unit scale
    double h_max_factor = 0.05;
    double on_curve_tol = 1e-8; // allowed |level value| at vertices
    double seed_tol = 1e-10;
    double singular_guard = 1e-4;  // minimum distance at which a node triggers a jump
    double node_value_tol = 1e-8;  // ||p(zeta)| - 1| below this flags the curve singular
    double node_jump_tol = 1e-11;  // ... and below this the tracer jumps the node;
                                   // wider pinches are resolved by the corrector
    double grad_floor = 1e-8;      // below this the level value is unreadable
    double dedup_tol_factor = 1e-3;
    bool node_handling = true;
    bool reverse = false;
    std::size_t min_closure_steps = 10;
    std::size_t max_steps = 500000;

    double h_min() const { return h_min_factor * scale; }
    double h_max() const { return h_max_factor * scale; }
    double closure_tol() const { return 10.0 * h_min(); }
    double dedup_tol() const { return dedup_tol_factor * scale; }
};

/// One closed or clipped polyline on a level curve.
struct CurveComponent {
    std::vector<cplx> vertices;
    bool closed = false;
    double length = 0.0;
    double on_curve_tol = 0.0;
    double length_error = 0.0; // chord-vs-arc deficit estimate

    void recompute_length() {
        length = 0.0;
        for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
            length += std::abs(vertices[i + 1] - vertices[i]);
        if (closed && vertices.size() > 1) length += std::abs(vertices.front() - vertices.back());
    }
};

/// A traced lemniscate: components of {|p| = 1} plus the singularity report.
struct Lemniscate {
    std::vector<CurveComponent> components;
    double total_length = 0.0;
    double length_error = 0.0;
    bool singular = false;
    std::vector<cplx> singular_points;
};

/// Thrown when a singular lemniscate is traced with node handling disabled;
/// carries whatever was traced before the curve became untraceable.
class partial_length_error : public numerical_error {
public:
    partial_length_error(const std::string& msg, Lemniscate partial_result)
        : numerical_error(msg), partial(std::move(partial_result)) {}
    Lemniscate partial;
};

namespace detail {

/// Level value and gradient (as a complex number) of the implicit function
/// being traced, in a common normalization so tolerances mean the same thing
/// for |p|-curves and Re-curves.
struct FieldEval {
    double val = 0.0;
    cplx grad{};
};

/// log|p|: zero level is the lemniscate, gradient conj(p'/p).
struct ModulusField {
    const Polynomial* p;
    FieldEval eval(cplx z) const {
        const JetValue j = eval_jet_coeffs(p->coeffs(), z);
        const double ap = std::abs(j.p);
        if (ap < 1e-150) return {-345.0, cplx(0.0)};
        return {std::log(ap), std::conj(j.dp / j.p)};
    }
};

/// Re f scaled by the coefficient size on the window, gradient conj(f')/scale.
struct RealPartField {
    const Polynomial* f;
    double value_scale = 1.0;
    FieldEval eval(cplx z) const {
        const JetValue j = eval_jet_coeffs(f->coeffs(), z);
        return {j.p.real() / value_scale, std::conj(j.dp) / value_scale};
    }
};

inline double dist_point_segment(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 < 1e-300) return std::abs(p - a);
    double t = ((p - a) * std::conj(ab)).real() / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

/// Chord-vs-arc deficit of a polyline, from the turn between consecutive
/// segments: per segment ~ |dz| * turn^2 / 24.
inline double polyline_length_deficit(const std::vector<cplx>& v, bool closed) {
    double err = 0.0;
    cplx prev_dir = 0.0;
    const std::size_t n = v.size();
    if (n < 3) return 0.0;
    for (std::size_t i = 0; i + 1 < n + (closed ? 1 : 0); ++i) {
        const cplx d = v[(i + 1) % n] - v[i % n];
        const double len = std::abs(d);
        if (len < 1e-300) continue;
        const cplx dir = d / len;
        if (std::abs(prev_dir) > 0.5) {
            const double turn = std::abs(dir - prev_dir);
            err += len * turn * turn / 24.0;
        }
        prev_dir = dir;
    }
    return err;
}

/// Newton correction along the local normal. Converges all the way to the
/// roundoff floor of the level value, not merely to `tol`: near a tight
/// pinch both branches lie inside the tol-band and only a machine-precision
/// landing keeps the trace on the right one. Returns false when the landing
/// is worse than tol (caller shrinks the step).
template <typename Field>
bool correct_onto_curve(const Field& field, cplx& z, double tol, double grad_floor) {
    double prev = 1e300;
    for (int it = 0; it < 30; ++it) {
        const FieldEval e = field.eval(z);
        const double g = std::abs(e.grad);
        const double av = std::abs(e.val);
        if (av <= 1e-14) return true;
        if (g < grad_floor) return av <= tol * 10.0; // value-flat zone
        if (av >= 0.7 * prev) return av <= tol;      // stalled at the roundoff floor
        z -= e.val * e.grad / (g * g);               // -val/|grad| along the normal
        prev = av;
    }
    return std::abs(field.eval(z).val) <= tol;
}

/// A singular point of the level curve together with the radius inside which
/// the level value is numerically flat (indistinguishable from on-curve at
/// the working tolerance). The tracer must jump straight across that zone:
/// inside it the corrector would drift onto an adjacent branch.
struct NodeInfo {
    cplx pos;
    double trigger = 0.0;
};

/// Probe the flat-zone radius around a node: grow r until the level value is
/// clearly readable in some direction. Golden-angle directions avoid sampling
/// only the symmetry phases of z^n-like structures.
template <typename Field>
double probe_node_trigger(const Field& field, cplx node, const StepControl& ctrl) {
    const double floor_r = ctrl.singular_guard * ctrl.scale;
    const double threshold = 50.0 * ctrl.on_curve_tol;
    double r = floor_r;
    while (r < 0.45 * ctrl.scale) {
        double vmax = 0.0;
        for (int d = 0; d < 24; ++d) {
            const cplx dir = std::polar(1.0, 2.399963229728653 * d);
            vmax = std::max(vmax, std::abs(field.eval(node + r * dir).val));
        }
        if (vmax >= threshold) return r;
        r *= 1.3;
    }
    return 0.45 * ctrl.scale;
}

template <typename Field>
struct LevelTracer {
    const Field& field;
    const StepControl& ctrl;
    const std::vector<NodeInfo>& nodes;

    CurveComponent component;
    std::vector<cplx> hit_nodes;

    cplx tangent_at(cplx z, cplx prev_tangent) const {
        const FieldEval e = field.eval(z);
        const double g = std::abs(e.grad);
        if (g < 1e-300) return prev_tangent;
        cplx t = cplx(0.0, 1.0) * e.grad / g;
        // keep a consistent direction of travel
        if ((t * std::conj(prev_tangent)).real() < 0.0) t = -t;
        return t;
    }

    /// Straight continuation across a node: reflect through the foot of the
    /// perpendicular from the node onto the travel ray, then walk forward out
    /// of the flat zone. Exact for the branches there, which are tangent to
    /// the ray to high order (that is what made the zone flat).
    bool jump_across_node(cplx& z, cplx tangent, const NodeInfo& node) {
        const double guard = ctrl.singular_guard * ctrl.scale;
        const double proj = ((node.pos - z) * std::conj(tangent)).real();
        if (proj < -guard) return false;
        cplx land = z + (2.0 * std::max(proj, 0.0) + guard) * tangent;
        // emit vertices while walking so vertex spacing stays bounded
        const double walk_cap = 3.0 * ctrl.scale;
        double walked = 0.0;
        double step = std::max(guard, ctrl.h_min());
        while (walked < walk_cap) {
            const FieldEval e = field.eval(land);
            if (std::abs(land - node.pos) >= node.trigger && std::abs(e.grad) >= ctrl.grad_floor &&
                std::abs(e.val) <= 0.5)
                break;
            if (!component.vertices.empty() &&
                std::abs(land - component.vertices.back()) >= 0.5 * ctrl.h_max())
                component.vertices.push_back(land);
            land += step * tangent;
            walked += step;
            step = std::min(step * 1.5, ctrl.h_max());
        }
        if (walked >= walk_cap) return false;
        if (!correct_onto_curve(field, land, ctrl.on_curve_tol, ctrl.grad_floor)) return false;
        z = land;
        hit_nodes.push_back(node.pos);
        return true;
    }

    /// Returns the node whose flat zone the predictor segment [z, z+h*t]
    /// enters while heading toward it, if any.
    const NodeInfo* node_ahead(cplx z, cplx tangent, double h) const {
        const cplx ahead = z + h * tangent;
        for (const auto& node : nodes) {
            if (dist_point_segment(node.pos, z, ahead) >= node.trigger) continue;
            const double proj = ((node.pos - z) * std::conj(tangent)).real();
            if (proj > 0.1 * std::abs(node.pos - z)) return &node;
        }
        return nullptr;
    }
};

template <typename Field>
std::vector<NodeInfo> probe_nodes(const Field& field, const std::vector<cplx>& node_positions,
                                  const StepControl& ctrl) {
    std::vector<NodeInfo> out;
    out.reserve(node_positions.size());
    for (const auto& pos : node_positions)
        out.push_back({pos, probe_node_trigger(field, pos, ctrl)});
    return out;
}

template <typename Field>
CurveComponent trace_level_curve(const Field& field, cplx seed, const StepControl& ctrl,
                                 const std::vector<NodeInfo>& nodes, double clip_radius,
                                 std::vector<cplx>* singular_hits = nullptr,
                                 cplx direction_hint = cplx(0.0)) {
    {
        const FieldEval e0 = field.eval(seed);
        if (std::abs(e0.val) > std::max(ctrl.seed_tol * 100.0, ctrl.on_curve_tol))
            throw std::invalid_argument("trace: seed is not on the curve");
    }

    LevelTracer<Field> tracer{field, ctrl, nodes, {}, {}};
    CurveComponent& comp = tracer.component;
    comp.on_curve_tol = ctrl.on_curve_tol;

    cplx z = seed;
    correct_onto_curve(field, z, ctrl.on_curve_tol, ctrl.grad_floor);

    // initial direction: 90 degrees counterclockwise from the outward normal,
    // flipped to match the caller's hint when one is given
    cplx tangent;
    {
        const FieldEval e = field.eval(z);
        if (std::abs(e.grad) < ctrl.grad_floor)
            throw std::invalid_argument("trace: seed too close to a critical point");
        tangent = cplx(0.0, 1.0) * e.grad / std::abs(e.grad);
        if (std::abs(direction_hint) > 0.0 && (tangent * std::conj(direction_hint)).real() < 0.0)
            tangent = -tangent;
    }
    const cplx start = z;
    const cplx start_tangent = tangent;
    comp.vertices.push_back(z);

    double curvature = 0.0;
    std::size_t steps = 0;
    double since_jump = 1e300; // arc distance since the last node jump (hysteresis)
    double rearm_dist = 0.0;
    cplx grad_dir = 0.0; // unit gradient at the previous vertex (strand identity)
    {
        const FieldEval e = field.eval(z);
        if (std::abs(e.grad) >= ctrl.grad_floor) grad_dir = e.grad / std::abs(e.grad);
    }

    while (steps++ < ctrl.max_steps) {
        double h = std::clamp(ctrl.base_h * ctrl.scale / (1.0 + curvature * ctrl.scale),
                              ctrl.h_min(), ctrl.h_max());

        // without node handling, crossing a node is ambiguous: refuse
        if (!ctrl.node_handling && tracer.node_ahead(z, tangent, h) != nullptr)
            throw step_collapse_error("trace: step collapse at a singular point (node handling disabled)");

        // node handling: jump straight across flagged singular points
        if (ctrl.node_handling && since_jump > rearm_dist) {
            const NodeInfo* node = tracer.node_ahead(z, tangent, h);
            if (node == nullptr && std::abs(field.eval(z).grad) < ctrl.grad_floor &&
                !nodes.empty()) {
                // gradient unreadable: aim at the nearest node ahead of us
                const NodeInfo* best = nullptr;
                double best_d = 1e300;
                for (const auto& n : nodes) {
                    const double d = std::abs(n.pos - z);
                    if (((n.pos - z) * std::conj(tangent)).real() >
                            -ctrl.singular_guard * ctrl.scale &&
                        d < best_d) {
                        best = &n;
                        best_d = d;
                    }
                }
                node = best;
            }
            if (node != nullptr) {
                cplx znew = z;
                if (!tracer.jump_across_node(znew, tangent, *node))
                    throw step_collapse_error("trace: node jump failed");
                since_jump = 0.0;
                rearm_dist = 1.2 * std::abs(znew - node->pos);
                z = znew;
                tangent = tracer.tangent_at(z, tangent);
                {
                    const FieldEval e = field.eval(z);
                    grad_dir = std::abs(e.grad) >= ctrl.grad_floor ? e.grad / std::abs(e.grad)
                                                                   : cplx(0.0);
                }
                comp.vertices.push_back(z);
                continue;
            }
        }

        // predictor + corrector, shrinking h until the corrector lands
        cplx znew;
        cplx tnew;
        for (;;) {
            znew = z + h * tangent;
            bool ok = correct_onto_curve(field, znew, ctrl.on_curve_tol, ctrl.grad_floor);
            if (ok && std::abs(znew - z) > 1e-3 * h) {
                const FieldEval en = field.eval(znew);
                const double gn = std::abs(en.grad);
                // a near-reversal of the gradient between consecutive points
                // means the corrector landed on a neighboring strand of the
                // curve (travel-sign matching would mask it): redo smaller
                if (gn >= ctrl.grad_floor && std::abs(grad_dir) > 0.5 &&
                    (en.grad * std::conj(grad_dir)).real() <= 0.0) {
                    ok = false;
                } else {
                    tnew = gn < 1e-300 ? tangent : cplx(0.0, 1.0) * en.grad / gn;
                    if ((tnew * std::conj(tangent)).real() < 0.0) tnew = -tnew;
                    // redo the step when the tangent turned more than the
                    // step controller assumed
                    const double turn = std::abs(tnew - tangent);
                    const double kappa = turn / std::max(std::abs(znew - z), 1e-300);
                    if (turn < 0.5 &&
                        (h <= 1.25 * ctrl.h_min() ||
                         h <= 2.5 * std::max(ctrl.base_h * ctrl.scale / (1.0 + kappa * ctrl.scale),
                                             ctrl.h_min()))) {
                        curvature = kappa;
                        if (gn >= ctrl.grad_floor) grad_dir = en.grad / gn;
                        break;
                    }
                    ok = false;
                }
            }
            if (!ok) {
                if (h <= 1.01 * ctrl.h_min()) {
                    if (!ctrl.node_handling)
                        throw step_collapse_error("trace: step collapse (node handling disabled?)");
                    throw step_collapse_error("trace: step collapse near unguarded singular point");
                }
                h = std::max(0.5 * h, ctrl.h_min());
            }
        }

        since_jump += std::abs(znew - z);

        // clipping at the window circle for open (real-part) curves
        if (clip_radius > 0.0 && std::abs(znew) > clip_radius) {
            const cplx a = z, d = znew - z;
            const double A = std::norm(d), B = 2.0 * (a * std::conj(d)).real(),
                         C = std::norm(a) - clip_radius * clip_radius;
            const double disc = std::max(0.0, B * B - 4.0 * A * C);
            const double s = (-B + std::sqrt(disc)) / (2.0 * A);
            const cplx exit = a + std::clamp(s, 0.0, 1.0) * d;
            comp.vertices.push_back(exit);
            comp.closed = false;
            comp.recompute_length();
            comp.length_error = std::max(polyline_length_deficit(comp.vertices, false),
                                         1e-12 * comp.length);
            if (singular_hits) *singular_hits = tracer.hit_nodes;
            return comp;
        }

        // closure test against the start point
        if (steps >= ctrl.min_closure_steps &&
            dist_point_segment(start, z, znew) <= ctrl.closure_tol() &&
            (tnew * std::conj(start_tangent)).real() > 0.0) {
            comp.closed = true;
            comp.recompute_length();
            comp.length_error = std::max(polyline_length_deficit(comp.vertices, true),
                                         1e-12 * comp.length);
            if (singular_hits) *singular_hits = tracer.hit_nodes;
            return comp;
        }

        z = znew;
        tangent = tnew;
        comp.vertices.push_back(z);
    }
    throw non_closure_error("trace: curve did not close within the step budget");
}

/// Uniform grid over segments of already-accepted components, for the
/// point-near-polyline queries used by deduplication.
class SegmentGrid {
public:
    explicit SegmentGrid(double cell) : cell_(cell) {}

    void add_polyline(const std::vector<cplx>& v, bool closed) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i) add_segment(v[i], v[i + 1]);
        if (closed && v.size() > 1) add_segment(v.back(), v.front());
    }

    bool near(cplx p, double tol) const {
        const long cx = cell_of(p.real()), cy = cell_of(p.imag());
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) {
                const auto it = cells_.find(key(cx + dx, cy + dy));
                if (it == cells_.end()) continue;
                for (const auto& seg : it->second)
                    if (dist_point_segment(p, seg.first, seg.second) <= tol) return true;
            }
        return false;
    }

    bool empty() const { return cells_.empty(); }

private:
    long cell_of(double x) const { return static_cast<long>(std::floor(x / cell_)); }
    static long long key(long x, long y) { return (static_cast<long long>(x) << 24) ^ (y & 0xffffff); }

    void add_segment(cplx a, cplx b) {
        // register the segment in every cell its bounding box touches
        const long x0 = cell_of(std::min(a.real(), b.real())), x1 = cell_of(std::max(a.real(), b.real()));
        const long y0 = cell_of(std::min(a.imag(), b.imag())), y1 = cell_of(std::max(a.imag(), b.imag()));
        for (long x = x0; x <= x1; ++x)
            for (long y = y0; y <= y1; ++y) cells_[key(x, y)].push_back({a, b});
    }

    double cell_;
    std::unordered_map<long long, std::vector<std::pair<cplx, cplx>>> cells_;
};

} // namespace detail

/// One on-curve point per root of p, found by marching outward from the root
/// and bisecting the bracket of |p| = 1.
inline std::vector<cplx> seed_points(const Polynomial& p, const RootSet& roots,
                                     const StepControl& ctrl = {}) {
    if (roots.roots.empty()) throw std::invalid_argument("seed_points: empty root set");
    cplx centroid = 0.0;
    int total = 0;
    for (const auto& r : roots.roots) {
        centroid += r.location * static_cast<double>(r.multiplicity);
        total += r.multiplicity;
    }
    centroid /= static_cast<double>(total);

    const double max_abs = roots.max_abs();
    const double radius = 2.0 + max_abs;

    std::vector<cplx> seeds;
    for (const auto& r : roots.roots) {
        if (std::abs(p(r.location)) >= 1.0)
            throw std::invalid_argument("seed_points: |p| >= 1 at a reported root");
        cplx dir = r.location - centroid;
        dir = std::abs(dir) > 1e-9 ? dir / std::abs(dir) : cplx(1.0);

        const double dt = 0.05 * (1.0 + max_abs);
        double lo = 0.0, hi = -1.0;
        for (double t = dt; t <= radius; t += dt) {
            if (std::abs(p(r.location + t * dir)) >= 1.0) {
                hi = t;
                break;
            }
            lo = t;
        }
        if (hi < 0.0)
            throw bracket_error("seed_points: |p| never reached 1 within the search radius");
        for (int it = 0; it < 200 && (hi - lo) > 1e-17 * (1.0 + hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double v = std::abs(p(r.location + mid * dir));
            if (std::abs(v - 1.0) <= 0.01 * ctrl.seed_tol) {
                lo = hi = mid;
                break;
            }
            (v < 1.0 ? lo : hi) = mid;
        }
        seeds.push_back(r.location + hi * dir);
    }
    return seeds;
}

/// Critical points lying on the curve itself (these make the lemniscate
/// singular and are where the tracer must jump).
inline std::vector<cplx> singular_nodes(const Polynomial& p, const RootSet& crit,
                                        double node_value_tol) {
    std::vector<cplx> nodes;
    for (const auto& zeta : crit.roots)
        if (std::abs(std::abs(p(zeta.location)) - 1.0) <= node_value_tol)
            nodes.push_back(zeta.location);
    return nodes;
}

/// Trace the component of {|p| = 1} through `seed`.
inline CurveComponent trace_component(const Polynomial& p, cplx seed, StepControl ctrl = {},
                                      std::vector<cplx>* singular_hits = nullptr) {
    const RootSet roots = find_roots(p);
    ctrl.scale = 1.0 + roots.max_abs();
    const RootSet crit = find_critical_points(p);
    detail::ModulusField field{&p};
    const auto nodes =
        detail::probe_nodes(field, singular_nodes(p, crit, ctrl.node_jump_tol), ctrl);
    CurveComponent comp = detail::trace_level_curve(field, seed, ctrl, nodes, 0.0, singular_hits);
    if (ctrl.reverse) {
        std::reverse(comp.vertices.begin(), comp.vertices.end());
        comp.recompute_length();
    }
    return comp;
}

/// Full lemniscate: trace from every seed, deduplicate components that
/// retraced the same curve, sum the lengths.
inline Lemniscate lemniscate_length_trace(const Polynomial& p, StepControl ctrl = {}) {
    const RootSet roots = find_roots(p);
    ctrl.scale = 1.0 + roots.max_abs();
    const RootSet crit = find_critical_points(p);
    const auto flag_positions = singular_nodes(p, crit, ctrl.node_value_tol);
    const auto node_positions = singular_nodes(p, crit, ctrl.node_jump_tol);

    Lemniscate out;
    out.singular = !flag_positions.empty();

    const auto seeds = seed_points(p, roots, ctrl);
    detail::ModulusField field{&p};
    const auto nodes = detail::probe_nodes(field, node_positions, ctrl);
    detail::SegmentGrid grid(std::max(ctrl.h_max(), 4.0 * ctrl.dedup_tol()));

    for (const auto& seed : seeds) {
        if (!grid.empty() && grid.near(seed, ctrl.dedup_tol())) continue; // already covered

        std::vector<cplx> hits;
        CurveComponent comp;
        try {
            comp = detail::trace_level_curve(field, seed, ctrl, nodes, 0.0, &hits);
        } catch (const step_collapse_error& e) {
            if (!ctrl.node_handling && out.singular) {
                for (const auto& c : out.components) out.total_length += c.length;
                out.singular_points = node_positions;
                throw partial_length_error(std::string("lemniscate_length_trace: ") + e.what(),
                                           std::move(out));
            }
            throw;
        }

        // duplicate check: most sampled vertices lying on an accepted
        // component means this trace re-covered it
        if (!grid.empty()) {
            std::size_t nearby = 0, sampled = 0;
            for (std::size_t i = 0; i < comp.vertices.size(); i += 8) {
                ++sampled;
                if (grid.near(comp.vertices[i], ctrl.dedup_tol())) ++nearby;
            }
            if (sampled > 0 && nearby * 2 >= sampled) continue;
        }

        grid.add_polyline(comp.vertices, comp.closed);
        for (const auto& hit : hits) {
            bool known = false;
            for (const auto& s : out.singular_points)
                if (std::abs(s - hit) < 1e-9) known = true;
            if (!known) out.singular_points.push_back(hit);
        }
        out.components.push_back(std::move(comp));
    }

    for (const auto& c : out.components) {
        out.total_length += c.length;
        out.length_error += c.length_error;
    }
    if (out.singular && out.singular_points.empty()) out.singular_points = flag_positions;
    return out;
}

/// Length of {Re f = 0} inside the disk D_r, traced from its boundary
/// crossings with exact clipping at |z| = r.
inline double realpart_curve_length(const Polynomial& f, double r, StepControl ctrl = {},
                                    std::vector<CurveComponent>* arcs_out = nullptr) {
    if (r <= 0.0) throw std::invalid_argument("realpart_curve_length: r must be positive");
    ctrl.scale = 1.0 + r;

    detail::RealPartField field{&f, std::max(1.0, detail::horner_scale(f.coeffs(), r))};

    std::vector<detail::NodeInfo> nodes;
    if (f.degree() >= 2) {
        const RootSet crit = find_critical_points(f);
        std::vector<cplx> positions;
        for (const auto& zeta : crit.roots) {
            const double val = std::abs(field.eval(zeta.location).val);
            if (val <= ctrl.node_jump_tol && std::abs(zeta.location) < r)
                positions.push_back(zeta.location);
        }
        nodes = detail::probe_nodes(field, positions, ctrl);
    }

    // boundary crossings of Re f on |z| = r, located by sweep + bisection
    std::vector<double> crossing_angles;
    {
        const int N = std::max(512, 64 * f.degree());
        std::vector<double> vals(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i)
            vals[static_cast<std::size_t>(i)] =
                field.eval(std::polar(r, 2.0 * M_PI * i / N)).val;
        for (int i = 0; i < N; ++i) {
            const double a = vals[static_cast<std::size_t>(i)];
            const double b = vals[static_cast<std::size_t>((i + 1) % N)];
            if (a == 0.0) crossing_angles.push_back(2.0 * M_PI * i / N);
            if (a * b < 0.0) {
                double lo = 2.0 * M_PI * i / N, hi = 2.0 * M_PI * (i + 1) / N;
                double flo = a;
                for (int it = 0; it < 90; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = field.eval(std::polar(r, mid)).val;
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                crossing_angles.push_back(0.5 * (lo + hi));
            }
        }
    }

    std::vector<CurveComponent> arcs;
    std::vector<bool> used(crossing_angles.size(), false);
    detail::SegmentGrid grid(std::max(ctrl.h_max(), 4.0 * ctrl.dedup_tol()));

    for (std::size_t c = 0; c < crossing_angles.size(); ++c) {
        if (used[c]) continue;
        used[c] = true;
        const cplx zc = std::polar(r, crossing_angles[c]);
        if (!grid.empty() && grid.near(zc, ctrl.dedup_tol())) continue;

        // point the tangent into the disk
        cplx z = zc;
        const detail::FieldEval e = field.eval(z);
        if (std::abs(e.grad) < ctrl.grad_floor) continue; // grazing at a critical point
        cplx tangent = cplx(0.0, 1.0) * e.grad / std::abs(e.grad);
        if ((tangent * std::conj(-z)).real() < 0.0) tangent = -tangent;

        StepControl arc_ctrl = ctrl;
        CurveComponent arc;
        {
            // nudge inward so the start is strictly inside the window
            cplx seed = z + tangent * (1e-7 * ctrl.scale);
            detail::correct_onto_curve(field, seed, ctrl.on_curve_tol, ctrl.grad_floor);
            arc = detail::trace_level_curve(field, seed, arc_ctrl, nodes, r, nullptr, tangent);
        }
        arc.vertices.insert(arc.vertices.begin(), zc);
        arc.recompute_length();

        // retire the crossing where the arc exited
        if (!arc.vertices.empty()) {
            const cplx exit = arc.vertices.back();
            double best = 1e300;
            std::size_t best_i = crossing_angles.size();
            for (std::size_t i = 0; i < crossing_angles.size(); ++i) {
                if (used[i]) continue;
                const double d = std::abs(exit - std::polar(r, crossing_angles[i]));
                if (d < best) {
                    best = d;
                    best_i = i;
                }
            }
            if (best_i < crossing_angles.size() && best < 100.0 * ctrl.closure_tol())
                used[best_i] = true;
        }

        if (!grid.empty()) {
            std::size_t nearby = 0, sampled = 0;
            for (std::size_t i = 0; i < arc.vertices.size(); i += 8) {
                ++sampled;
                if (grid.near(arc.vertices[i], ctrl.dedup_tol())) ++nearby;
            }
            if (sampled > 0 && nearby * 2 >= sampled) continue;
        }
        grid.add_polyline(arc.vertices, false);
        arcs.push_back(std::move(arc));
    }

    double total = 0.0;
    for (const auto& a : arcs) total += a.length;
    if (arcs_out) *arcs_out = std::move(arcs);
    return total;
}

/// CSV export: header `component,x,y`; closed components repeat their first
/// vertex last.
inline void write_polyline_csv(const Lemniscate& lem, std::ostream& os) {
    os << "component,x,y\n";
    char buf[96];
    for (std::size_t ci = 0; ci < lem.components.size(); ++ci) {
        const auto& comp = lem.components[ci];
        auto emit = [&](cplx v) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", ci, v.real(), v.imag());
            os << buf;
        };
        for (const auto& v : comp.vertices) emit(v);
        if (comp.closed && !comp.vertices.empty()) emit(comp.vertices.front());
    }
}

} // namespace lemni
