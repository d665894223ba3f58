#include "epoly/displacement.hpp"

#include "epoly/parisi.hpp"
#include "epoly/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace epoly {

double h_kernel(const ResolventKernel& k, const ModelParams& p, double q, const ParisiMeasure& z, double x) {
    if (x == 0.0) return 0.0;
    const ParisiMeasure zq = with_radius(z, q);
    const double qs = zq.q_star();
    const DeltaFamily fam{[&](double y) { return k.green(k.k(y), x, 1) * k.k_prime(y); },
                          [&](double y) { return k.green(k.k(y), x, 0); },
                          {}};
    return -(2.0 / p.beta) * fam.Phi(p.beta * (q - qs)) - 2.0 * delta_integral(zq, p.beta, fam, 0.0, qs);
}

double h_continuum(const ModelParams& p, const RsbSolution& sol, double x) {
    return h_kernel(ResolventKernel::continuum(p.t), p, sol.q_c, sol.measure, x);
}

double h_discrete(long L, const ModelParams& p, const RsbSolution& sol_L, double x) {
    return h_kernel(ResolventKernel::lattice(L, p.t), p, sol_L.q_c, sol_L.measure, x);
}

double h_rs(const ModelParams& p, const Correlator& c, double x) {
    const double b1 = c.b1(2.0 / (p.beta * std::sqrt(p.mu * p.t)));
    return -(2.0 / p.beta) * green_continuum(p.mu, x, p.t, 0) - 4.0 * b1 * green_continuum(p.mu, x, p.t, 1);
}

double h_1rsb(const ModelParams& p, const RsbSolution& sol, double x) {
    if (sol.phase != Phase::ONE_RSB) throw std::invalid_argument("h_1rsb: solution is not 1RSB");
    const double m = sol.extras.at("m"), q0 = sol.extras.at("q0"), a = sol.extras.at("a");
    const double mu = p.mu, t = p.t, b = p.beta;
    const double mus = 1.0 / (a * a * t);
    const double g = green_continuum(mu, x, t, 0), gs = green_continuum(mus, x, t, 0);
    return -(2.0 / b) * gs + 4.0 * q0 * std::sqrt(mu * mu * mu * t) * green_continuum(mu, x, t, 1) -
           (2.0 / (b * m)) * (g - gs);
}

namespace {

// f(z) = 1 - e^{-z} - z e^{-z}
double fz(double z) {
    if (z < 1e-3) return z * z * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0);
    return -std::expm1(-z) - z * std::exp(-z);
}

// int_lo^hi f(z) z^{-alpha-1} dz
double f_moment(double alpha, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double eps = 1e-3;
    double acc = 0;
    if (lo < eps) {
        const double b = std::min(hi, eps);
        const double c[5] = {0.5, -1.0 / 3.0, 1.0 / 8.0, -1.0 / 30.0, 1.0 / 144.0};
        for (int n = 2; n <= 6; ++n) {
            const double e = n - alpha;
            acc += c[n - 2] * (std::pow(b, e) - (lo > 0 ? std::pow(lo, e) : 0.0)) / e;
        }
        lo = b;
    }
    if (hi <= lo) return acc;
    const double v0 = std::log(lo), v1 = std::log(hi);
    const int chunks = std::max(1, static_cast<int>(std::ceil((v1 - v0) / 2.0)));
    for (int i = 0; i < chunks; ++i) {
        const double a = v0 + (v1 - v0) * i / chunks, b = v0 + (v1 - v0) * (i + 1) / chunks;
        acc += integrate([&](double v) { return fz(std::exp(v)) * std::exp(-alpha * v); }, a, b, 1e-10,
                         "massless displacement integral");
    }
    return acc;
}

}  // namespace

double h_frsb_massless(double beta, double t, double gamma, double x, double mu) {
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("h_frsb_massless: need 0 < gamma < 1");
    if (!(mu >= 0)) throw std::invalid_argument("h_frsb_massless: mu must be >= 0");
    x = std::abs(x);
    if (x == 0.0) return 0.0;
    const Correlator c = Correlator::power_law(1.0, 1.0, gamma);
    const auto ml = larkin_mass(beta, t, c);
    if (!ml) throw std::runtime_error("h_frsb_massless: no Larkin mass");
    const double u0 = 2.0 / (beta * std::sqrt(*ml * t)) + 1.0;
    const double pexp = 2.0 * (gamma + 2.0) / 3.0;
    const double alpha = 2.0 / pexp;
    const double C = std::pow(2.0 * gamma * (gamma + 1.0), 2.0 / 3.0) / std::cbrt(t);
    const double xk = x * std::sqrt(C / t);
    const double z0 = xk * std::pow(u0, -pexp / 2.0);
    double zu = 0.0;
    if (mu > 0) {
        const double c0 = std::pow(2.0 * gamma * (gamma + 1.0) / std::sqrt(t), 1.0 / (gamma + 2.0));
        const double U = c0 * std::pow(mu, -3.0 / (2.0 * (gamma + 2.0)));
        if (U <= u0) return -(2.0 / beta) * green_continuum(*ml, x, t, 0);
        zu = xk * std::pow(U, -pexp / 2.0);
    }
    // int_{u0}^{U} (1/2) f(xk u^{-p/2}) du after z = xk u^{-p/2}
    const double tail = 0.5 * alpha * std::pow(xk, alpha) * f_moment(alpha, zu, z0);
    return -(2.0 / beta) * green_continuum(*ml, x, t, 0) + tail;
}

double h_frsb_massless_prefactor(double t, double gamma) {
    return 0.5 * std::pow(2.0 * gamma * (gamma + 1.0) / (t * t), 1.0 / (gamma + 2.0)) *
           std::tgamma(2.0 - 3.0 / (gamma + 2.0));
}

double frsb_loglog_slope(double beta, double t, double gamma, double x1, double x2) {
    const double h1 = h_frsb_massless(beta, t, gamma, x1, 0.0), h2 = h_frsb_massless(beta, t, gamma, x2, 0.0);
    return std::log(h2 / h1) / std::log(x2 / x1);
}

double circulant_expectation(const ResolventKernel& k, const ModelParams& p, const RsbSolution& sol_L,
                             const CirculantSymbol& a) {
    if (!k.is_lattice()) throw std::invalid_argument("circulant_expectation needs a lattice kernel");
    if (static_cast<long>(a.first_row.size()) != k.L()) throw std::invalid_argument("circulant size mismatch");
    const std::vector<double> sym = a.folded_symbol();
    const ParisiMeasure& z = sol_L.measure;
    const double q = sol_L.q_c, qs = z.q_star();
    const DeltaFamily fam{[&](double y) { return k.circulant_resolvent(sym, k.k(y), 2) * k.k_prime(y); },
                          [&](double y) { return -k.circulant_resolvent(sym, k.k(y), 1); },
                          {}};
    return -fam.Phi(p.beta * (q - qs)) / p.beta - delta_integral(with_radius(z, q), p.beta, fam, 0.0, qs);
}

Wandering wandering_exponent(const Correlator& c, double t, double beta) {
    switch (c.kind()) {
        case CorrKind::power_law: {
            const double gm = c.gamma();
            if (gm < 1.0) {
                Wandering w{3.0 / (2.0 * (gm + 2.0)), std::nullopt, "superdiffusive_frsb"};
                if (c.g() == 1.0 && c.a() == 1.0) w.prefactor = h_frsb_massless_prefactor(t, gm);
                return w;
            }
            [[fallthrough]];
        }
        case CorrKind::exponential: {
            const auto bstar = massless_transition_beta(t, c);
            const bool rsb = bstar && beta > *bstar;
            return {0.5, std::nullopt, rsb ? "diffusive_rsb" : "diffusive_rs"};
        }
        default: throw UnsupportedCorrelator("wandering_exponent: mixtures have no analytic tail classification");
    }
}

}  // namespace epoly
