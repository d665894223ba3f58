#include <doctest.h>

#include <stdexcept>

#include "epoly/correlator.hpp"
#include "properties.hpp"

#include <cmath>

using namespace epoly;
using doctest::Approx;

TEST_CASE("eval_b closed forms") {
    const auto p = Correlator::power_law(1, 1, 2);
    CHECK(eval_b(p, 0, 0) == Approx(1.0).epsilon(1e-15));
    CHECK(eval_b(p, 0, 2) == Approx(6.0).epsilon(1e-15));
    const auto e = Correlator::exponential(1, 1);
    CHECK(eval_b(e, 2, 1) == Approx(-std::exp(-2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(eval_b(e, -1, 0), std::domain_error);
    CHECK_THROWS_AS(eval_b(e, 1, 4), std::domain_error);
}

TEST_CASE("constructors reject bad parameters") {
    CHECK_THROWS_AS(Correlator::exponential(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(Correlator::power_law(1, 1, -1), std::invalid_argument);
    CHECK_THROWS_AS(Correlator::mixture(-1, {}), std::invalid_argument);
    CHECK(Correlator::mixture(0.5, {{1, 1}}).outside_assumptions());
    CHECK_FALSE(Correlator::mixture(0, {{1, 1}}).outside_assumptions());
}

TEST_CASE("U_B") {
    const auto e = Correlator::exponential(1, 1);
    CHECK(ub(e, 1e-300, 1.0) == Approx(std::pow(2.0, -1.0 / 3.0)).epsilon(1e-12));
    const auto lin = Correlator::power_law(1, 1, 1);
    for (double s : {0.1, 1.0, 10.0}) CHECK(ub_second(lin, s, 2.0) == Approx(0.0).epsilon(1e-12));
    CHECK(ub(lin, 2.0, 1.0) - ub(lin, 1.0, 1.0) == Approx(ub(lin, 3.0, 1.0) - ub(lin, 2.0, 1.0)).epsilon(1e-12));
    const auto pl = Correlator::power_law(1, 1, 0.5);
    for (double s = 0.01; s < 100; s *= 1.5) CHECK(ub_second(pl, s, 1.0) < 0);
    for (double s : {0.3, 2.0}) {
        const double h = 1e-5;
        CHECK(ub_prime(pl, s, 1.0) == Approx((ub(pl, s + h, 1.0) - ub(pl, s - h, 1.0)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("ub_shape and massless criterion") {
    CHECK(ub_shape(Correlator::power_law(1, 1, 2), 1) == UbShape::strictly_convex);
    CHECK(ub_shape(Correlator::power_law(1, 1, 0.5), 1) == UbShape::strictly_concave);
    CHECK(ub_shape(Correlator::power_law(1, 1, 1), 1) == UbShape::linear);
    CHECK(ub_shape(Correlator::exponential(1, 1), 1) == UbShape::strictly_convex);
    CHECK(ub_shape(Correlator::mixture(0, {{1, 1}}), 1) == UbShape::strictly_convex);
    CHECK(massless_rsb_criterion(Correlator::power_law(1, 1, 0.5)));
    CHECK_FALSE(massless_rsb_criterion(Correlator::exponential(1, 1)));
    CHECK_FALSE(massless_rsb_criterion(Correlator::power_law(1, 1, 1)));
    CHECK_FALSE(massless_rsb_criterion(Correlator::mixture(0, {{0.1, 1}, {3, 1}})));
}

TEST_CASE("normalization helper") {
    const auto n = normalize(Correlator::exponential(2, 3), 1.5, 0.4, 0.8);
    CHECK(n.corr.g() == Approx(1.0));
    CHECK(n.corr.a() == Approx(3.0));
    CHECK(n.beta == Approx(3.0));
    CHECK(n.mu == Approx(0.2));
    CHECK(n.t == Approx(0.4));
}

TEST_CASE("Gauss-Laguerre integrates polynomials exactly") {
    const auto [x, w] = gauss_laguerre(20, 0.5);
    double m0 = 0, m3 = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        m0 += w[i];
        m3 += w[i] * x[i] * x[i] * x[i];
    }
    CHECK(m0 == Approx(std::tgamma(1.5)).epsilon(1e-12));
    CHECK(m3 == Approx(std::tgamma(4.5)).epsilon(1e-12));
}

TEST_CASE("correlator properties") {
    for (const auto& c : props::correlator_properties()) {
        INFO(c.name << " " << c.detail);
        CHECK(c.ok);
    }
}
