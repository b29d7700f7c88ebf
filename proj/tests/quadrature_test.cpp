#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "lemni/polynomial.hpp"
#include "lemni/quadrature.hpp"
#include "lemni/rng.hpp"
#include "lemni/tracer.hpp"
#include "test_support.hpp"

using lemni::cplx;
using lemni::Polynomial;
using lemni::QuadBudget;
using testsup::from_roots;
using testsup::monomial;

TEST_CASE("plain areas") {
    const lemni::RootSet none{};

    // p = z^n: E is the unit disk, area pi
    for (int n : {1, 3, 6}) {
        const lemni::RegionE region(monomial(n));
        const auto r = lemni::integrate_over_E(
            region, [](cplx) { return cplx(1.0); }, none);
        CHECK(std::abs(r.real() - M_PI) < 1e-3);
    }

    // p = z^2 - 1: interior of r^2 = 2 cos 2 theta has area 2
    const lemni::RegionE bern(Polynomial({cplx(-1.0), cplx(0.0), cplx(1.0)}));
    const auto r2 = lemni::integrate_over_E(
        bern, [](cplx) { return cplx(1.0); }, none);
    CHECK(std::abs(r2.real() - 2.0) < 1e-2);
}

TEST_CASE("singular integrand over the unit disk") {
    // p = z, integrand 1/|z| with the singularity listed: integral is 2 pi
    const Polynomial p({cplx(0.0), cplx(1.0)});
    const lemni::RegionE region(p);
    lemni::RootSet sing;
    sing.roots.push_back({cplx(0.0), 1});
    const auto r = lemni::integrate_over_E(
        region, [](cplx z) { return cplx(1.0 / std::max(std::abs(z), 1e-300)); }, sing,
        QuadBudget{800000, 1e-4});
    CHECK(std::abs(r.real() - 2.0 * M_PI) < 1e-3);
    CHECK(r.singular_cells >= 1);
}

TEST_CASE("length by area formula v1") {
    for (int n : {1, 2, 4}) {
        const auto r = lemni::length_area_v1(monomial(n));
        CHECK(std::abs(r.real() - 2.0 * M_PI) / (2.0 * M_PI) < 5e-3);
        CHECK(std::abs(r.value.imag()) <= 3.0 * std::max(r.error_estimate, 1e-9));
    }
    const auto bern = lemni::length_area_v1(Polynomial({cplx(-1.0), cplx(0.0), cplx(1.0)}));
    const double oracle = testsup::bernoulli_length_oracle();
    CHECK(std::abs(bern.real() - oracle) / oracle < 5e-3);
}

TEST_CASE("length by area formula v2") {
    for (int n : {1, 2, 4}) {
        const auto r = lemni::length_area_v2(monomial(n));
        CHECK(std::abs(r.real() - 2.0 * M_PI) / (2.0 * M_PI) < 5e-3);
    }
    const auto bern = lemni::length_area_v2(Polynomial({cplx(-1.0), cplx(0.0), cplx(1.0)}));
    const double oracle = testsup::bernoulli_length_oracle();
    CHECK(std::abs(bern.real() - oracle) / oracle < 5e-3);
}

TEST_CASE("area methods agree with the tracer on z^2 - 4") {
    const Polynomial p({cplx(-4.0), cplx(0.0), cplx(1.0)});
    const double traced = lemniscate_length_trace(p).total_length;
    const auto v1 = lemni::length_area_v1(p);
    const auto v2 = lemni::length_area_v2(p);
    CHECK(std::abs(v1.real() - traced) <= 0.005 * traced + 3.0 * v1.error_estimate);
    CHECK(std::abs(v2.real() - traced) <= 0.005 * traced + 3.0 * v2.error_estimate);
}

TEST_CASE("v1 and v2 agree on random quartics") {
    lemni::RandomStream rng(314);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<cplx> roots(4);
        for (auto& r : roots) r = rng.uniform_disk(0.5);
        const Polynomial p = from_roots(roots);
        const auto v1 = lemni::length_area_v1(p);
        const auto v2 = lemni::length_area_v2(p);
        CHECK(std::abs(v1.real() - v2.real()) <=
              0.005 * v1.real() + 3.0 * (v1.error_estimate + v2.error_estimate));
    }
}

TEST_CASE("pushforward identity") {
    for (int n : {2, 5}) {
        const auto check = lemni::pushforward_check(monomial(n));
        CHECK(check.energy_ok);
        CHECK(check.cauchy_ok);
        CHECK(std::abs(check.energy.real() - M_PI * n) / (M_PI * n) < 0.01);
    }
    // z^2 - 1 -> 2 pi and z^3 + 0.1 z -> 3 pi (instances of the identity)
    const auto b = lemni::pushforward_check(Polynomial({cplx(-1.0), cplx(0.0), cplx(1.0)}));
    CHECK(std::abs(b.energy.real() - 2.0 * M_PI) / (2.0 * M_PI) < 0.01);
    const auto c =
        lemni::pushforward_check(Polynomial({cplx(0.0), cplx(0.1), cplx(0.0), cplx(1.0)}));
    CHECK(std::abs(c.energy.real() - 3.0 * M_PI) / (3.0 * M_PI) < 0.01);
}

TEST_CASE("Polya area bound") {
    const auto zn = lemni::area_capacity_check(monomial(4));
    CHECK(zn.polya_ok);
    CHECK(std::abs(zn.area.real() - M_PI) / M_PI < 0.01); // equality case

    const auto bern = lemni::area_capacity_check(Polynomial({cplx(-1.0), cplx(0.0), cplx(1.0)}));
    CHECK(bern.polya_ok);
    CHECK(bern.area.real() < M_PI);

    const auto far = lemni::area_capacity_check(Polynomial({cplx(-4.0), cplx(0.0), cplx(1.0)}));
    CHECK(far.polya_ok);
    CHECK(std::abs(far.area.real() - 2.0 * M_PI / 16.0) < 0.05);
}

TEST_CASE("singular mass bounds the length") {
    // p = z (n = 1): integral of 1/|z| over the disk = 2 pi
    {
        const Polynomial p({cplx(0.0), cplx(1.0)});
        const lemni::RegionE region(p);
        const auto r = lemni::singular_mass(p, region);
        CHECK(std::abs(r.real() - 2.0 * M_PI) / (2.0 * M_PI) < 0.01);
    }
    // p = z^n: all 2n-1 poles at 0, E = D: (2n-1) * 2 pi; here every pole
    // lies in E, so the chain  |L| <= mass <= (2n-1) 2 pi  is checkable
    for (int n : {2, 4}) {
        const Polynomial p = monomial(n);
        const lemni::RegionE region(p);
        const auto r = lemni::singular_mass(p, region);
        const double expect = (2.0 * n - 1.0) * 2.0 * M_PI;
        CHECK(std::abs(r.real() - expect) / expect < 0.01);
        const double traced = lemniscate_length_trace(p).total_length;
        CHECK(traced <= r.real() * 1.0001);
        CHECK(r.real() <= expect * 1.01);
    }
    // Bernoulli: mass must dominate the measured length
    {
        const Polynomial p({cplx(-1.0), cplx(0.0), cplx(1.0)});
        const lemni::RegionE region(p);
        const auto r = lemni::singular_mass(p, region);
        CHECK(r.real() >= testsup::bernoulli_length_oracle());
    }
}

TEST_CASE("budget exhaustion carries the best value found") {
    const lemni::RegionE region(monomial(2));
    const lemni::RootSet none{};
    bool threw = false;
    try {
        lemni::integrate_over_E(
            region, [](cplx) { return cplx(1.0); }, none, QuadBudget{40, 1e-9});
    } catch (const lemni::budget_exhausted_error& e) {
        threw = true;
        CHECK(e.best_value > 0.0);
        CHECK(e.best_error > 0.0);
    }
    CHECK(threw);
}

TEST_CASE("both upper bounds hold on a random sample") {
    lemni::RandomStream rng(2718);
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        std::vector<cplx> roots(static_cast<std::size_t>(n));
        for (auto& r : roots) r = rng.uniform_disk(0.5);
        const Polynomial p = from_roots(roots);
        const double len = lemniscate_length_trace(p).total_length;
        CHECK(len <= 2.0 * M_PI * (2.0 * n - 1.0));
        CHECK(len <= 2.0 * M_PI * (n - 1.0 + std::sqrt(n)));
    }
}
