#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fedhp/bound.hpp"
#include "fedhp/control.hpp"

using namespace fedhp;

namespace {

// Reference values from tests/oracles/bound_reference.py (exact rationals
// where the formula allows).
BoundParams reference() {
    BoundParams p;
    p.L = 1;
    p.sigma = 1;
    p.zeta = 1;
    p.rho = 0.5;
    p.eta = 0.01;
    p.tau = 4;
    p.H = 100;
    p.N = 8;
    p.f1 = 1;
    return p;
}

}  // namespace

TEST_CASE("reference instance values") {
    const auto p = reference();
    CHECK(convergence_bound(p) == doctest::Approx(128947.0 / 123650.0).epsilon(1e-13));
    CHECK(suggested_eta(p) == doctest::Approx(0.032484698249741546).epsilon(1e-13));
    CHECK(convergence_rate(p) == doctest::Approx(0.22351889240383854).epsilon(1e-13));
    CHECK(tau_threshold(p) == doctest::Approx(28.284271247461902).epsilon(1e-13));

    BoundParams q;
    q.L = 2;
    q.sigma = 0.5;
    q.zeta = 0;
    q.rho = 0;
    q.eta = 0.02;
    q.tau = 2;
    q.H = 10;
    q.N = 4;
    q.f1 = 1.5;
    q.f_star = 0.5;
    CHECK(convergence_bound(q) == doctest::Approx(10.425484949832775).epsilon(1e-13));
}

TEST_CASE("validity conditions are reported") {
    auto p = reference();
    p.eta = 0.1;
    p.rho = 0.6;  // (0.4)^2 - 27 * 0.01 < 0
    CHECK_THROWS_WITH_AS(convergence_bound(p), doctest::Contains("27"), BoundDomainError);
    p = reference();
    p.tau = 40;  // eta > 1/(4 L tau)
    CHECK_THROWS_WITH_AS(convergence_bound(p), doctest::Contains("1/(4 L tau)"), BoundDomainError);
    p = reference();
    p.rho = 1.0;
    CHECK_THROWS_AS(convergence_bound(p), BoundDomainError);
    p = reference();
    p.sigma = -1;
    CHECK_THROWS_AS(convergence_bound(p), BoundDomainError);
}

TEST_CASE("vanishing learning rate leaves the optimisation term") {
    auto p = reference();
    p.zeta = 0;
    p.rho = 0;
    p.eta = 1e-6;
    const double first = 4.0 * p.f1 / (p.eta * p.tau * p.H);
    CHECK(convergence_bound(p) == doctest::Approx(first).epsilon(1e-6));
}

TEST_CASE("bound increases in rho and zeta over a validity grid") {
    auto p = reference();
    p.eta = 0.005;
    for (int zi = 0; zi < 10; ++zi) {
        double prev = -1.0;
        for (int ri = 0; ri < 10; ++ri) {
            p.zeta = 0.2 * zi;
            p.rho = 0.09 * ri;
            const double v = convergence_bound(p);
            CHECK(v > prev);
            prev = v;
        }
    }
    for (int ri = 0; ri < 10; ++ri) {
        double prev = -1.0;
        for (int zi = 0; zi < 10; ++zi) {
            p.zeta = 0.2 * zi;
            p.rho = 0.09 * ri;
            const double v = convergence_bound(p);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("tau trend changes sign at the threshold") {
    auto p = reference();
    p.eta = 0.001;
    p.H = 1000;  // keeps eta <= 1/(4 L tau) well past the threshold
    const double thr = tau_threshold(p);
    REQUIRE(thr > 2.0);
    auto at = [&](double tau) {
        auto q = p;
        q.tau = tau;
        return convergence_bound(q);
    };
    const double below = std::floor(thr), above = std::ceil(thr);
    CHECK(at(below - 1) > at(below));
    CHECK(at(above + 1) > at(above));
    for (double tau = 1; tau + 1 <= below; ++tau) CHECK(at(tau + 1) < at(tau));
    for (double tau = above; tau < above + 20; ++tau) CHECK(at(tau + 1) > at(tau));
}

TEST_CASE("learning rate collapses to 1/(6L)") {
    BoundParams p;
    p.L = 3.0;
    p.sigma = 0;
    p.zeta = 0;
    p.rho = 0;
    CHECK(std::abs(suggested_eta(p) - 1.0 / 18.0) < 1e-12);
    p.L = 0;
    CHECK_THROWS_AS(suggested_eta(p), BoundDomainError);
}

TEST_CASE("learning rate decreases in the round budget") {
    auto p = reference();
    double prev = 1e9;
    for (double H = 1; H < 1e6; H *= 3) {
        p.H = H;
        const double eta = suggested_eta(p);
        CHECK(eta < prev);
        prev = eta;
    }
}

TEST_CASE("tau threshold scales as 1/eta and matches the controller") {
    auto p = reference();
    const double base = tau_threshold(p);
    p.eta *= 2;
    CHECK(tau_threshold(p) == doctest::Approx(base / 2));
    p.sigma = 0;
    CHECK(std::isinf(tau_threshold(p)));

    p = reference();
    p.eta = 0.05;
    p.H = 100;
    const auto tau = closed_form_tau(static_cast<std::size_t>(p.N), p.f1, p.L, 100, p.eta, p.sigma, 1000);
    CHECK(static_cast<double>(tau) == std::round(tau_threshold(p)));
    p.f1 = -1;
    CHECK_THROWS_AS(tau_threshold(p), BoundDomainError);
}
