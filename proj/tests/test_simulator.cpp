#include <doctest.h>

#include <stdexcept>

#include "epoly/kernels.hpp"
#include "epoly/simulator.hpp"
#include "properties.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace epoly;
using doctest::Approx;

namespace {

bool within(const Estimate& e, double target, double k = 3.0) { return std::abs(e.mean - target) <= k * e.stderr_; }

}  // namespace

TEST_CASE("environment") {
    const auto z = sample_environment(Correlator::zero(), 4, 3, 16, 1);
    const double u[4] = {0.1, -2, 3, 0.5};
    CHECK(z.n_atoms == 0);
    CHECK(z.potential(1, u) == 0.0);
    CHECK_THROWS_AS(sample_environment(Correlator::mixture(0.3, {{1, 1}}), 4, 2, 8, 1), std::invalid_argument);
}

TEST_CASE("random-feature covariance") {
    const int N = 8;
    const auto env = sample_environment(Correlator::mixture(0, {{1.0, 1.0}}), N, 1, 4096, 99);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 10.0);
    std::vector<double> v, prod;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> u(N), w(N), d(N);
        double dn = 0;
        for (int k = 0; k < N; ++k) {
            u[static_cast<size_t>(k)] = nd(rng);
            d[static_cast<size_t>(k)] = nd(rng);
            dn += d[static_cast<size_t>(k)] * d[static_cast<size_t>(k)];
        }
        for (int k = 0; k < N; ++k) w[static_cast<size_t>(k)] = u[static_cast<size_t>(k)] + d[static_cast<size_t>(k)] * std::sqrt(N / dn);
        const double a = env.potential(0, u.data()), b = env.potential(0, w.data());
        v.push_back(a * a);
        prod.push_back(a * b);
    }
    auto mean_se = [](const std::vector<double>& s) {
        double m = 0, q = 0;
        for (double x : s) m += x / s.size();
        for (double x : s) q += (x - m) * (x - m) / (s.size() - 1);
        return Estimate{m, std::sqrt(q / s.size())};
    };
    const auto var = mean_se(v), cov = mean_se(prod);
    INFO("var " << var.mean << " +- " << var.stderr_ << ", cov " << cov.mean << " +- " << cov.stderr_);
    CHECK(within(var, 8.0));
    CHECK(within(cov, 8.0 * std::exp(-1.0)));
}

TEST_CASE("hamiltonian") {
    const auto z = sample_environment(Correlator::zero(), 3, 4, 4, 1);
    const ModelParams p{1, 0.7, 1.3, 4L};
    CHECK(hamiltonian(Config::Zero(4, 3), z, p) == 0.0);
    Config u(4, 3);
    for (int x = 0; x < 4; ++x) u.row(x) << 1.0, -2.0, 0.5;
    CHECK(hamiltonian(u, z, p) == Approx(0.5 / 2.0 * 0.7 * 4 * 5.25).epsilon(1e-14));
}

TEST_CASE("gradient properties") {
    for (const auto& c : props::simulator_gradient()) {
        INFO(c.name << " " << c.detail);
        CHECK(c.ok);
    }
}

TEST_CASE("Gaussian oracle, L=2") {
    const auto env = sample_environment(Correlator::zero(), 16, 2, 4, 1);
    const ModelParams p{1, 1, 1, 2L};
    const auto st = run_chains(p, env, 2, 20000, 0.5, 42);
    const auto r = batch_means(st.radius);
    INFO("radius " << r.mean << " +- " << r.stderr_);
    CHECK(within(r, 5 * std::sqrt(2.0) / 9));
    CHECK(within(batch_means(st.overlap), 0.0));
    CHECK(st.acceptance >= 0.3);
    CHECK(estimate_msd(st, 1, 1).mean == 0.0);
}

TEST_CASE("Gaussian oracle, L=4: five exact moments") {
    const long L = 4;
    const auto env = sample_environment(Correlator::zero(), 16, L, 4, 1);
    const ModelParams p{1.3, 0.8, 1.2, L};
    const auto st = run_chains(p, env, 2, 20000, 0.5, 7);
    const auto k = ResolventKernel::lattice(L, 1.2);
    const double var = k.r1(0.8) / 1.3;
    CHECK(within(batch_means(st.radius), var));
    for (long j = 1; j <= L / 2; ++j) {
        const double ex = -(2 / 1.3) * k.green(0.8, j / std::sqrt(double(L)) + 1e-9, 0);
        const auto m = estimate_msd(st, j, 0);
        INFO("j=" << j << " msd " << m.mean << " +- " << m.stderr_ << " exact " << ex);
        CHECK(within(m, ex));
    }
    // nearest-neighbour covariance
    std::vector<double> nn;
    for (size_t i = 0; i < st.msd[1].size(); ++i) nn.push_back(st.radius[i] - 0.5 * st.msd[1][i]);
    const double nn_ex = var + (1 / 1.3) * k.green(0.8, 1 / std::sqrt(double(L)) + 1e-9, 0);
    CHECK(within(batch_means(nn), nn_ex));
    // translation invariance: each site against the site average
    for (long x = 0; x < L; ++x) {
        std::vector<double> d;
        for (size_t i = 0; i < st.radius.size(); ++i) d.push_back(st.radius_site[static_cast<size_t>(x)][i] - st.radius[i]);
        const auto e = batch_means(d);
        INFO("site " << x << " offset " << e.mean << " +- " << e.stderr_);
        CHECK(within(e, 0.0));
    }
    CHECK(within(batch_means(st.overlap), 0.0));
}

TEST_CASE("reproducibility and divergence") {
    const auto env = sample_environment(Correlator::exponential(1, 1), 4, 2, 32, 5);
    const ModelParams p{1, 1, 1, 2L};
    const auto a = run_chains(p, env, 2, 400, 0.5, 9), b = run_chains(p, env, 2, 400, 0.5, 9);
    CHECK(a.radius == b.radius);
    CHECK(a.overlap_samples == b.overlap_samples);
    const auto c = run_chains(p, env, 2, 400, 0.5, 10);
    CHECK(a.radius != c.radius);
    auto bad = env;
    bad.gain[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(run_chains(p, bad, 2, 100, 0.5, 9), std::runtime_error);
    CHECK_THROWS_AS(run_chains(ModelParams{-1, 1, 1, 2L}, env, 2, 100, 0.5, 9), std::invalid_argument);
}

TEST_CASE("batch means and histogram") {
    std::vector<double> s(3200);
    for (size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i % 2);
    const auto e = batch_means(s);
    CHECK(e.mean == Approx(0.5));
    CHECK(e.stderr_ == Approx(0.0).scale(1.0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.3, 0.1);
    std::vector<double> g(20000);
    for (auto& v : g) v = nd(rng);
    const auto h = make_histogram(g, 50);
    CHECK(h.unimodal());
    CHECK(h.mode() == Approx(0.3).epsilon(0.1));
    std::vector<double> two;
    for (int i = 0; i < 10000; ++i) two.push_back(i % 2 ? nd(rng) - 1.0 : nd(rng) + 1.0);
    CHECK_FALSE(make_histogram(two, 50).unimodal());
}

TEST_CASE("disorder-averaged simulate") {
    SimConfig cfg;
    cfg.N = 4;
    cfg.L = 2;
    cfg.M = 16;
    cfg.steps = 500;
    cfg.n_disorder = 3;
    cfg.threads = 2;
    const auto a = simulate(ModelParams{1, 1, 1, 2L}, Correlator::exponential(1, 1), cfg);
    cfg.threads = 1;
    const auto b = simulate(ModelParams{1, 1, 1, 2L}, Correlator::exponential(1, 1), cfg);
    CHECK(a.radius.mean == b.radius.mean);
    CHECK(a.runs.size() == 3);
    CHECK(a.msd.size() == 2);
    CHECK(a.overlap_hist.counts.size() == 50);
}
