#include "properties.hpp"

#include "epoly/correlator.hpp"
#include "epoly/kernels.hpp"
#include "epoly/model.hpp"
#include "epoly/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace epoly;

namespace props {

namespace {

std::string fmt(const char* label, double v) {
    std::ostringstream os;
    os.precision(3);
    os << label << "=" << v;
    return os.str();
}

std::vector<double> loggrid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

ParisiMeasure random_atoms(std::mt19937_64& rng, double q) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int k = 1 + static_cast<int>(u(rng) * 5);
    std::vector<std::pair<double, double>> at;
    double tot = 0;
    for (int i = 0; i < k; ++i) {
        const double w = 0.05 + u(rng);
        at.emplace_back(0.9 * q * u(rng), w);
        tot += w;
    }
    double acc = 0;
    for (int i = 0; i < k; ++i) {
        at[static_cast<size_t>(i)].second /= tot;
        acc += at[static_cast<size_t>(i)].second;
    }
    at.back().second += 1.0 - acc;
    return ParisiMeasure::from_atoms(q, at);
}

ParisiMeasure random_sampled(std::mt19937_64& rng, double q) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double qs = q * (0.3 + 0.6 * u(rng));
    const double lo = qs * 0.5 * u(rng);
    std::vector<double> xs, ys;
    const int n = 12;
    double y = 0.1 * u(rng);
    for (int i = 0; i < n; ++i) {
        xs.push_back(lo + (qs - lo) * i / (n - 1));
        ys.push_back(i == n - 1 ? 1.0 : y);
        y = std::min(1.0, y + 0.15 * u(rng));
    }
    return ParisiMeasure::sampled(q, xs, ys, qs);
}

}  // namespace

std::vector<Check> measure_invariants() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_mono = 0, worst_lip = 0, worst_conv = 0, worst_nonconvex = 0, worst_tr = 0, worst_lower = 0, worst_dirac = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const double q = 0.5 + 2.0 * u(rng);
        const ParisiMeasure z = trial % 2 ? random_atoms(rng, q) : random_sampled(rng, q);
        const int n = 400;
        const double h = q / n;
        double prev_c = 0;
        for (int i = 0; i <= n; ++i) {
            const double s = i == n ? q : q * i / n;
            const double c = z.cdf(s);
            worst_mono = std::max(worst_mono, prev_c - c);
            prev_c = c;
            if (i < n) {
                const double d0 = z.delta(s), d1 = z.delta(std::min(q, s + h));
                worst_lip = std::max({worst_lip, d1 - d0, (d0 - d1) - h * (1 + 1e-12)});
            }
            if (i > 0 && i < n) {
                const double sec = z.delta(s - h) - 2 * z.delta(s) + z.delta(std::min(q, s + h));
                worst_conv = std::max(worst_conv, sec);
                worst_nonconvex = std::max(worst_nonconvex, -sec);
            }
            worst_lower = std::max(worst_lower, (q - std::max(s, z.q_star())) - z.delta(s));
        }
        const double r = (u(rng) - 0.3) * z.support_min() + 0.2 * u(rng);
        const ParisiMeasure zr = z.translate(r);
        for (int i = 0; i <= 50; ++i) {
            const double s = i == 50 ? q : q * i / 50;
            if (s + r < 0) continue;
            worst_tr = std::max(worst_tr, std::abs(zr.delta(std::min(zr.q(), s + r)) - z.delta(s)));
        }
        const double qs = q * u(rng) * 0.95;
        const ParisiMeasure dz = ParisiMeasure::dirac(q, qs);
        for (int i = 0; i <= 50; ++i) {
            const double s = i == 50 ? q : q * i / 50;
            worst_dirac = std::max(worst_dirac, std::abs(dz.delta(s) - (q - std::max(s, qs))));
        }
    }
    return {
        {"measure: CDF nondecreasing", worst_mono <= 0.0, fmt("max drop", worst_mono)},
        {"measure: delta nonincreasing and 1-Lipschitz", worst_lip <= 1e-12, fmt("max violation", worst_lip)},
        // delta' = -cdf is nonincreasing, so delta is concave; convexity fails for any nontrivial measure
        {"measure: delta concave", worst_conv <= 1e-12,
         fmt("max positive second difference", worst_conv) + ", " + fmt("largest convexity defect", worst_nonconvex)},
        {"measure: delta(s) >= q - max(s, q_*)", worst_lower <= 1e-12, fmt("max violation", worst_lower)},
        {"measure: Dirac attains the lower bound", worst_dirac <= 1e-12, fmt("max error", worst_dirac)},
        {"measure: translate then delta commutes", worst_tr <= 1e-12, fmt("max error", worst_tr)},
    };
}

std::vector<Check> kernel_properties() {
    std::vector<Check> out;
    std::vector<std::pair<std::string, ResolventKernel>> ks = {
        {"continuum t=1", ResolventKernel::continuum(1.0)},   {"continuum t=0.3", ResolventKernel::continuum(0.3)},
        {"lattice L=1", ResolventKernel::lattice(1, 1.0)},    {"lattice L=2", ResolventKernel::lattice(2, 1.0)},
        {"lattice L=7", ResolventKernel::lattice(7, 2.0)},    {"lattice L=100", ResolventKernel::lattice(100, 1.0)},
        {"lattice L=4096", ResolventKernel::lattice(4096, 0.5)}};
    const auto grid = loggrid(1e-3, 1e3, 61);
    for (const auto& [name, k] : ks) {
        bool mono = true, conv = true;
        double worst_r2 = 0, worst_inv = 0, worst_uinv = 0;
        for (size_t i = 0; i < grid.size(); ++i) {
            const double m = grid[i];
            if (i + 1 < grid.size()) {
                mono &= k.r1(grid[i + 1]) < k.r1(m) && k.k(grid[i + 1]) < k.k(m);
            }
            if (i > 0 && i + 1 < grid.size()) {
                // convexity on a geometric grid via the three-point slope test
                auto convex3 = [&](auto f) {
                    const double a = grid[i - 1], b = m, c = grid[i + 1];
                    return (f(b) - f(a)) / (b - a) <= (f(c) - f(b)) / (c - b) * (1 + 1e-12) + 1e-300;
                };
                conv &= convex3([&](double x) { return k.r1(x); }) && convex3([&](double x) { return k.k(x); });
            }
            const double h = 1e-5 * m;
            const double fd = -(k.r1(m + h) - k.r1(m - h)) / (2 * h);
            worst_r2 = std::max(worst_r2, std::abs(fd - k.r2(m)) / k.r2(m));
            worst_inv = std::max(worst_inv, std::abs(k.k(k.r1(m)) - m) / m);
            const double y = -k.k_prime(m);
            worst_uinv = std::max(worst_uinv, std::abs(-k.k_prime(k.u_inv(y)) - y) / y);
        }
        out.push_back({"kernel " + name + ": r1 and k strictly decreasing", mono, ""});
        out.push_back({"kernel " + name + ": r1 and k convex", conv, ""});
        out.push_back({"kernel " + name + ": r2 = -r1' (central differences)", worst_r2 <= 1e-6,
                       fmt("max rel error", worst_r2)});
        out.push_back({"kernel " + name + ": k(r1(mu)) = mu", worst_inv <= 1e-10, fmt("max rel error", worst_inv)});
        out.push_back({"kernel " + name + ": -k'(u_inv(y)) = y", worst_uinv <= 1e-10, fmt("max rel error", worst_uinv)});
    }
    return out;
}

std::vector<Check> correlator_properties() {
    std::vector<Check> out;
    std::vector<std::pair<std::string, Correlator>> cs = {
        {"exponential(1,1)", Correlator::exponential(1, 1)},
        {"exponential(2,0.3)", Correlator::exponential(2, 0.3)},
        {"power_law(1,1,0.5)", Correlator::power_law(1, 1, 0.5)},
        {"power_law(1,1,2)", Correlator::power_law(1, 1, 2)},
        {"power_law(3,0.5,1)", Correlator::power_law(3, 0.5, 1)},
        {"mixture", Correlator::mixture(0, {{0.5, 1.0}, {2.0, 0.3}})},
    };
    const auto grid = loggrid(1e-6, 1e6, 121);
    for (const auto& [name, c] : cs) {
        bool signs = true;
        for (double x : grid) {
            const double v[4] = {c.b(x), c.b1(x), c.b2(x), c.b3(x)};
            if (v[0] == 0.0) continue;  // exponential underflow
            signs &= v[0] > 0 && v[1] < 0 && v[2] > 0 && v[3] < 0;
        }
        double worst = 0;
        for (double x : loggrid(1e-3, 1e2, 41)) {
            const double h = 1e-5 * std::max(1.0, x);
            for (int o = 1; o <= 3; ++o) {
                const double fd = (c.eval(x + h, o - 1) - c.eval(x - h, o - 1)) / (2 * h);
                const double ex = c.eval(x, o);
                if (std::abs(ex) < 1e-250) continue;
                worst = std::max(worst, std::abs(fd - ex) / std::abs(ex));
            }
        }
        out.push_back({"correlator " + name + ": sign pattern (+,-,+,-)", signs, ""});
        out.push_back({"correlator " + name + ": derivatives vs central differences", worst <= 1e-6,
                       fmt("max rel error", worst)});
    }
    for (double gm : {0.5, 1.0, 2.0}) {
        const auto c = Correlator::power_law(1, 1, gm);
        const auto mix = c.to_mixture(200);
        double worst = 0;
        for (int i = 0; i <= 100; ++i) {
            const double x = 10.0 * i / 100;
            worst = std::max(worst, std::abs(mix.b(x) - c.b(x)) / c.b(x));
        }
        out.push_back({"correlator power_law gamma=" + std::to_string(gm).substr(0, 3) + ": 200-atom mixture on [0,10]",
                       worst <= 1e-4, fmt("max rel error", worst)});
    }
    return out;
}

std::vector<Check> simulator_gradient() {
    std::vector<Check> out;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int L : {1, 2, 3, 5}) {
        const auto env = sample_environment(Correlator::exponential(1.0, 1.0), 4, L, 64, 1234 + L);
        const ModelParams p{1.3, 0.7, 1.1, L};
        double worst = 0;
        for (int trial = 0; trial < 5; ++trial) {
            Config u(L, 4);
            for (int x = 0; x < L; ++x)
                for (int k = 0; k < 4; ++k) u(x, k) = nd(rng);
            const Config g = gradient(u, env, p);
            for (int x = 0; x < L; ++x)
                for (int k = 0; k < 4; ++k) {
                    const double h = 1e-5;
                    Config a = u, b = u;
                    a(x, k) += h;
                    b(x, k) -= h;
                    const double fd = (hamiltonian(a, env, p) - hamiltonian(b, env, p)) / (2 * h);
                    worst = std::max(worst, std::abs(fd - g(x, k)) / std::max(1.0, std::abs(g(x, k))));
                }
        }
        out.push_back({"simulator L=" + std::to_string(L) + ": gradient vs central differences", worst <= 1e-6,
                       fmt("max rel error", worst)});
    }
    return out;
}

std::vector<Check> green_properties() {
    bool neg = true, inc = true, conc = true;
    for (double t : {0.5, 1.0, 2.0})
        for (double x : {0.3, 1.0, 4.0}) {
            const auto g = loggrid(1e-4, 1e4, 81);
            for (size_t i = 0; i < g.size(); ++i) {
                const double v = green_continuum(g[i], x, t, 0);
                neg &= v < 0;
                if (i + 1 < g.size()) inc &= green_continuum(g[i + 1], x, t, 0) > v;
                if (i > 0 && i + 1 < g.size()) {
                    const double a = g[i - 1], b = g[i], c = g[i + 1];
                    const double fa = green_continuum(a, x, t, 0), fc = green_continuum(c, x, t, 0);
                    conc &= (v - fa) / (b - a) >= (fc - v) / (c - b);
                }
            }
        }
    const double big = green_continuum(1e12, 1.0, 1.0, 0);
    return {{"green: negative", neg, ""},
            {"green: increasing in mu", inc, ""},
            {"green: concave in mu", conc, ""},
            {"green: tends to 0 as mu grows", std::abs(big) < 1e-5, fmt("G(1e12)", big)}};
}

std::vector<Check> all() {
    std::vector<Check> out;
    for (auto f : {measure_invariants, kernel_properties, correlator_properties, simulator_gradient, green_properties}) {
        auto v = f();
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

}  // namespace props
