#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <sstream>

#include "lemni/polynomial.hpp"
#include "lemni/rng.hpp"
#include "lemni/roots.hpp"
#include "lemni/tracer.hpp"
#include "test_support.hpp"

using lemni::cplx;
using lemni::Polynomial;
using testsup::from_roots;
using testsup::monomial;

TEST_CASE("seed_points land on the curve") {
    const Polynomial p({cplx(-1.0), cplx(0.0), cplx(1.0)}); // z^2 - 1
    const auto roots = lemni::find_roots(p);
    const auto seeds = lemni::seed_points(p, roots);
    REQUIRE(seeds.size() == 2);
    for (const auto& s : seeds) CHECK(std::abs(std::abs(p(s)) - 1.0) < 1e-9);
    // from eta = +-1 the outward rays give +-sqrt(2)
    CHECK(std::abs(seeds[0] - cplx(-std::sqrt(2.0))) < 1e-9);
    CHECK(std::abs(seeds[1] - cplx(std::sqrt(2.0))) < 1e-9);

    const auto pz = monomial(4);
    const auto s0 = lemni::seed_points(pz, lemni::find_roots(pz));
    REQUIRE(s0.size() == 1);
    CHECK(std::abs(s0[0] - cplx(1.0)) < 1e-9);
}

TEST_CASE("circle traces to 2*pi within 1e-6") {
    for (int n : {1, 2, 3, 6}) {
        const auto lem = lemniscate_length_trace(monomial(n));
        REQUIRE(lem.components.size() == 1);
        CHECK(lem.components[0].closed);
        CHECK(std::abs(lem.total_length - 2.0 * M_PI) / (2.0 * M_PI) < 1e-6);
    }
}

TEST_CASE("z^n lemniscate is not singular") {
    // the critical point of z^n sits at 0 where |p| = 0, not 1
    const auto lem = lemniscate_length_trace(monomial(5));
    CHECK_FALSE(lem.singular);
    CHECK(lem.singular_points.empty());
}

TEST_CASE("z^2 - 0.5 is one peanut-shaped component") {
    // |p(0)| = 0.5 < 1 puts 0 inside E, so the two root lobes connect:
    // membership sampling is the oracle for the component count
    const Polynomial p({cplx(-0.5), cplx(0.0), cplx(1.0)});
    const auto lem = lemniscate_length_trace(p);
    CHECK_FALSE(lem.singular);
    CHECK(lem.components.size() ==
          static_cast<std::size_t>(testsup::flood_fill_components(p, 2.5)));
    CHECK(lem.components.size() == 1);
}

TEST_CASE("Bernoulli lemniscate with node handling") {
    const Polynomial p({cplx(-1.0), cplx(0.0), cplx(1.0)});
    const auto lem = lemniscate_length_trace(p);
    CHECK(lem.singular);
    REQUIRE(lem.singular_points.size() == 1);
    CHECK(std::abs(lem.singular_points[0]) < 1e-7);
    const double oracle = testsup::bernoulli_length_oracle();
    CHECK(std::abs(oracle - 7.41630) < 1e-5); // sanity on the oracle itself
    CHECK(std::abs(lem.total_length - oracle) / oracle < 5e-3);
}

TEST_CASE("node handling disabled fails with partial result") {
    const Polynomial p({cplx(-1.0), cplx(0.0), cplx(1.0)});
    lemni::StepControl ctrl;
    ctrl.node_handling = false;
    bool threw = false;
    try {
        lemniscate_length_trace(p, ctrl);
    } catch (const lemni::partial_length_error& e) {
        threw = true;
        CHECK(e.partial.singular);
    }
    CHECK(threw);
}

TEST_CASE("far ovals z^2 - 4") {
    const Polynomial p({cplx(-4.0), cplx(0.0), cplx(1.0)});
    const auto lem = lemniscate_length_trace(p);
    CHECK(lem.components.size() == 2);
    const double near_circles = 2.0 * 2.0 * M_PI * 0.25;
    CHECK(std::abs(lem.total_length - near_circles) / near_circles < 0.05);
    CHECK(lem.components.size() ==
          static_cast<std::size_t>(testsup::flood_fill_components(p, 3.0)));
}

TEST_CASE("every vertex satisfies the on-curve tolerance") {
    const Polynomial p = from_roots({cplx(0.3, 0.2), cplx(-0.4, 0.1), cplx(0.0, -0.3)});
    const auto lem = lemniscate_length_trace(p);
    for (const auto& comp : lem.components)
        for (const auto& v : comp.vertices)
            CHECK(std::abs(std::abs(p(v)) - 1.0) <= 2.0 * comp.on_curve_tol);
}

TEST_CASE("vertex spacing respects the step controller") {
    const auto lem = lemniscate_length_trace(monomial(3));
    lemni::StepControl ctrl; // defaults; scale = 1 for z^3
    ctrl.scale = 1.0;
    const auto& v = lem.components[0].vertices;
    for (std::size_t i = 0; i + 2 < v.size(); ++i) {
        const double d = std::abs(v[i + 1] - v[i]);
        CHECK(d >= 0.25 * ctrl.h_min());
        CHECK(d <= 1.5 * ctrl.h_max());
    }
}

TEST_CASE("halving the base step moves the length by less than 4x the error estimate") {
    const Polynomial p = from_roots({cplx(0.4), cplx(-0.2, 0.35), cplx(-0.1, -0.4)});
    lemni::StepControl c1, c2;
    c2.base_h = c1.base_h / 2.0;
    const auto l1 = lemniscate_length_trace(p, c1);
    const auto l2 = lemniscate_length_trace(p, c2);
    CHECK(std::abs(l1.total_length - l2.total_length) <= 4.0 * std::max(l1.length_error, 1e-12));
}

TEST_CASE("component count matches flood fill on nonsingular samples") {
    lemni::RandomStream rng(5150);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 3);
        std::vector<cplx> roots(static_cast<std::size_t>(n));
        for (auto& r : roots) r = rng.uniform_disk(0.9);
        const Polynomial p = from_roots(roots);
        const auto crit = lemni::find_critical_points(p);
        bool near_singular = false;
        for (const auto& zeta : crit.roots)
            if (std::abs(std::abs(p(zeta.location)) - 1.0) < 1e-3) near_singular = true;
        if (near_singular) continue;
        const auto lem = lemniscate_length_trace(p);
        CHECK(static_cast<int>(lem.components.size()) == testsup::flood_fill_components(p, 2.2));
    }
}

TEST_CASE("orientation reversal leaves the length unchanged") {
    const Polynomial p = from_roots({cplx(0.5, 0.1), cplx(-0.5, -0.2)});
    const auto roots = lemni::find_roots(p);
    const auto seeds = lemni::seed_points(p, roots);
    lemni::StepControl fwd, rev;
    rev.reverse = true;
    const auto a = lemni::trace_component(p, seeds[0], fwd);
    const auto b = lemni::trace_component(p, seeds[0], rev);
    CHECK(std::abs(a.length - b.length) <= 1e-12 * a.length);
}

TEST_CASE("real-part curves: lines and diameters") {
    // Re z^2 = 0 is the pair of diagonals: length 4 in the unit disk
    const double len2 = lemni::realpart_curve_length(monomial(2), 1.0);
    CHECK(std::abs(len2 - 4.0) < 1e-4);

    for (int n : {3, 4, 5}) {
        const double len = lemni::realpart_curve_length(monomial(n), 1.0);
        CHECK(std::abs(len - 2.0 * n) / (2.0 * n) < 1e-4);
    }

    // f = z^2 + 1: Re f = 0 is the hyperbola y^2 - x^2 = 1;
    // arc length inside D_2 is 4 * Integral_0^{x*} sqrt((1+2x^2)/(1+x^2)) dx
    // with x* = sqrt(3/2), evaluated by fine Simpson quadrature
    const Polynomial f({cplx(1.0), cplx(0.0), cplx(1.0)});
    const double xs = std::sqrt(1.5);
    const int N = 20000;
    double simpson = 0.0;
    auto integrand = [](double x) { return std::sqrt((1.0 + 2.0 * x * x) / (1.0 + x * x)); };
    for (int i = 0; i < N; ++i) {
        const double a = xs * i / N, b = xs * (i + 1) / N;
        simpson += (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
    }
    const double expected = 4.0 * simpson;
    const double len_f = lemni::realpart_curve_length(f, 2.0);
    CHECK(std::abs(len_f - expected) / expected < 1e-3);
}

TEST_CASE("polyline CSV export format") {
    const auto lem = lemniscate_length_trace(monomial(2));
    std::ostringstream os;
    lemni::write_polyline_csv(lem, os);
    const std::string csv = os.str();
    CHECK(csv.rfind("component,x,y\n", 0) == 0);
    // a closed component repeats its first vertex last
    std::istringstream is(csv);
    std::string header, first, line, last;
    std::getline(is, header);
    std::getline(is, first);
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    CHECK(first == last);
}
