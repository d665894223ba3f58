#include <doctest.h>

#include <stdexcept>

#include "epoly/kernels.hpp"
#include "properties.hpp"

#include <cmath>

using namespace epoly;
using doctest::Approx;

TEST_CASE("laplacian eigenvalues") {
    CHECK(laplacian_eigenvalues(1) == std::vector<double>{0.0});
    const auto e2 = laplacian_eigenvalues(2);
    CHECK(e2[0] == 0.0);
    CHECK(e2[1] == Approx(-8.0));
    const auto e4 = laplacian_eigenvalues(4);
    const double ex[4] = {0, -8, -16, -8};
    for (int i = 0; i < 4; ++i) CHECK(e4[static_cast<size_t>(i)] == Approx(ex[i]).epsilon(1e-14));
    int zeros = 0;
    for (double v : laplacian_eigenvalues(9)) zeros += v == 0.0;
    CHECK(zeros == 1);
}

TEST_CASE("resolvent sums") {
    CHECK(ResolventKernel::lattice(1, 1).r1(2.0) == Approx(0.5).epsilon(1e-15));
    CHECK(ResolventKernel::lattice(2, 1).r1(1.0) == Approx(5 * std::sqrt(2.0) / 9).epsilon(1e-15));
    const auto c = ResolventKernel::continuum(1);
    for (double m : {0.1, 1.0, 10.0}) CHECK(c.k(c.r1(m)) == Approx(m).epsilon(1e-12));
    const auto c2 = ResolventKernel::continuum(2);
    CHECK(c2.r1(3) == Approx(1 / std::sqrt(6.0)));
    CHECK(c2.r2(3) == Approx(1 / (2 * std::sqrt(54.0))));
    CHECK(c2.k(0.5) == Approx(2.0));
    CHECK(c2.k_prime(0.5) == Approx(-8.0));
    CHECK(c2.u_inv(3.0) == Approx(std::cbrt(1.0 / 3.0)));
    CHECK_THROWS_AS(c.r1(0.0), std::domain_error);
    CHECK_THROWS_AS(c.k(-1.0), std::domain_error);
}

TEST_CASE("log determinants and Kirchhoff") {
    CHECK(logdet(2, 1, 1) == Approx(std::log(9.0)).epsilon(1e-14));
    CHECK(pseudo_det(3) == Approx(9.0).epsilon(1e-12));
    CHECK(pseudo_det(5) == Approx(25.0).epsilon(1e-12));
    for (long L = 2; L <= 2048; L = L * 3 / 2 + 1) CHECK(pseudo_det(L) / (double(L) * L) == Approx(1.0).epsilon(1e-9));
    const auto k = ResolventKernel::lattice(50, 1.5);
    CHECK(k.logdet_diff(2.0, 1.0) ==
          Approx((logdet(50, 1.5, 2.0) - logdet(50, 1.5, 1.0)) / std::sqrt(50.0)).epsilon(1e-12));
}

TEST_CASE("heat kernel") {
    CHECK(heat_trace(1000000, 1.0) == Approx(1 / (2 * std::sqrt(M_PI))).epsilon(1e-2));
    CHECK(heat_entry(1000, 0.7, 0.0) == Approx(heat_trace(1000, 0.7)).epsilon(1e-14));
    CHECK(heat_entry(1000000, 1.0, 2.0) == Approx(std::exp(-1.0) / (2 * std::sqrt(M_PI))).epsilon(1e-2));
}

TEST_CASE("green functions") {
    CHECK(green_continuum(1, 0, 1, 0) == 0.0);
    CHECK(green_continuum(1, 0, 1, 1) == 0.0);
    CHECK(green_continuum(1, 1, 1, 0) == Approx((std::exp(-1.0) - 1) / 2).epsilon(1e-14));
    const auto k = ResolventKernel::lattice(1000000, 1);
    CHECK(k.green(1, 1, 0) == Approx(green_continuum(1, 1, 1, 0)).epsilon(1e-2));
    CHECK(k.green(1, 0, 0) == 0.0);
    const double h = 1e-5;
    for (auto kk : {ResolventKernel::continuum(1.3), ResolventKernel::lattice(64, 1.3)})
        CHECK(kk.green(0.8, 1.1, 1) ==
              Approx((kk.green(0.8 + h, 1.1, 0) - kk.green(0.8 - h, 1.1, 0)) / (2 * h)).epsilon(1e-7));
    // small-mass limit is -|x|/(2t)
    CHECK(green_continuum(1e-14, 3.0, 2.0, 0) == Approx(-0.75).epsilon(1e-6));
}

TEST_CASE("circulant symbols") {
    CHECK_THROWS_AS((CirculantSymbol{{1.0, 2.0, 3.0}}.validate()), std::invalid_argument);
    const auto id = CirculantSymbol::identity(6).folded_symbol();
    for (double v : id) CHECK(v == Approx(1.0));
    const auto e = CirculantSymbol::displacement(6, 0).folded_symbol();
    for (double v : e) CHECK(v == 0.0);
    const auto k = ResolventKernel::lattice(8, 1.0);
    CHECK(k.circulant_resolvent(CirculantSymbol::identity(8).folded_symbol(), 1.3, 1) == Approx(k.r1(1.3)));
}

TEST_CASE("lattice index") {
    CHECK(lattice_index(4, 0.5) == 1);
    CHECK(lattice_index(4, 2.0) == 0);
    CHECK(lattice_index(100, 0.25) == 2);
}

TEST_CASE("kernel properties") {
    for (const auto& c : props::kernel_properties()) {
        INFO(c.name << " " << c.detail);
        CHECK(c.ok);
    }
    for (const auto& c : props::green_properties()) {
        INFO(c.name << " " << c.detail);
        CHECK(c.ok);
    }
}
