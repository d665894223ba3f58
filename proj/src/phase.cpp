#include "epoly/phase.hpp"

#include "epoly/parallel.hpp"
#include "epoly/parisi.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace epoly {

double s_bar(const ModelParams& p) { return 1.0 / std::sqrt(p.mu * p.t); }

double g_function(const ModelParams& p, const Correlator& c, double s) {
    if (!(s > 0)) throw std::domain_error("g: s must be positive");
    const double b = p.beta;
    const double kappa = 2.0 * b * c.b1(2.0 / (b * std::sqrt(p.mu * p.t))) + p.mu;
    return b * b * c.b(2.0 * s / b) - 1.0 / (s * p.t) - s * kappa;
}

namespace {

double brent_max(const std::function<double(double)>& f, double lo, double hi) {
    auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, lo, hi, 52);
    return r.first;
}

}  // namespace

bool is_rs(const ModelParams& p, const Correlator& c) {
    p.validate();
    const double sb = s_bar(p);
    const double gb = g_function(p, c, sb);
    const int n = 1000;
    const double lo = std::min(sb, p.beta) * 1e-6;
    const double span = std::log(sb / lo);
    std::vector<double> s(n), g(n);
    for (int i = 0; i < n; ++i) {
        s[i] = i == n - 1 ? sb : lo * std::exp(span * i / (n - 1));
        g[i] = g_function(p, c, s[i]);
    }
    double best = *std::max_element(g.begin(), g.end());
    auto gf = [&](double x) { return g_function(p, c, x); };
    for (int i = 1; i + 1 < n; ++i) {
        if (g[i] >= g[i - 1] && g[i] >= g[i + 1]) {
            const double x = brent_max(gf, s[i - 1], s[i + 1]);
            best = std::max(best, gf(x));
        }
    }
    // a bump inside the last cell is invisible to the grid
    best = std::max(best, gf(brent_max(gf, s[n - 2], sb)));
    return best <= gb + 1e-9 * std::max(1.0, std::abs(gb));
}

std::optional<double> larkin_mass(double beta, double t, const Correlator& c) {
    if (!(beta > 0) || !(t > 0)) throw std::invalid_argument("larkin_mass: beta, t must be positive");
    auto h = [&](double lmu) {
        const double mu = std::exp(lmu);
        return c.b2(2.0 / (beta * std::sqrt(mu * t))) * 2.0 / std::sqrt(mu * mu * mu * t) - 1.0;
    };
    const double l0 = std::log(1e-16), l1 = std::log(1e8);
    const int n = 64 * 24;
    double hi = l1, hhi = h(hi);
    for (int i = n - 1; i >= 0; --i) {
        const double lo = l0 + (l1 - l0) * i / n;
        const double hlo = h(lo);
        if ((hlo > 0) != (hhi > 0)) {
            double a = lo, b = hi;
            const bool pos_left = hlo > 0;
            while (b - a > 1e-15 * std::max(1.0, std::abs(a))) {
                const double mid = 0.5 * (a + b);
                if ((h(mid) > 0) == pos_left) a = mid;
                else b = mid;
            }
            return std::exp(0.5 * (a + b));
        }
        hi = lo;
        hhi = hlo;
    }
    return std::nullopt;
}

RsbSolution solve_rs(const ModelParams& p, const Correlator& c) {
    p.validate();
    if (!is_rs(p, c)) throw PreconditionError("solve_rs: the RS condition sup g = g(1/sqrt(mu t)) fails");
    RsbSolution sol;
    sol.phase = Phase::RS;
    const double D = 1.0 / (p.beta * std::sqrt(p.mu * p.t));
    const double qs = -c.b1(2.0 * D) / std::sqrt(p.mu * p.mu * p.mu * p.t);
    sol.q_c = qs + D;
    sol.measure = ParisiMeasure::dirac(sol.q_c, qs);
    sol.free_energy = rs_free_energy(p, c);
    const auto k = ResolventKernel::continuum(p.t);
    sol.residuals = stationarity_residuals(k, p, c, sol.q_c, sol.measure);
    sol.extras["q_star"] = qs;
    return sol;
}

RsbSolution solve_rs_kernel(const ResolventKernel& k, const ModelParams& p, const Correlator& c, int n_grid) {
    if (!k.is_lattice()) return solve_rs(p, c);
    p.validate();
    RsbSolution sol;
    sol.phase = Phase::RS;
    const double D = k.r1(p.mu) / p.beta;
    const double qs = -2.0 * c.b1(2.0 * D) * k.r2(p.mu);
    sol.q_c = qs + D;
    sol.measure = ParisiMeasure::dirac(sol.q_c, qs);
    sol.free_energy = eval_functional(k, p, c, sol.q_c, sol.measure);
    sol.residuals = stationarity_residuals(k, p, c, sol.q_c, sol.measure, n_grid);
    sol.extras["q_star"] = qs;
    sol.extras["L"] = static_cast<double>(k.L());
    return sol;
}

OneRsbEval one_rsb_system(const ModelParams& p, const Correlator& c, double a, double m) {
    const double b = p.beta, t = p.t, mu = p.mu;
    const double sb = s_bar(p);
    const double eps = sb - a;
    const double dl = eps / (b * m);
    const double d0 = a / b + dl;
    const double x1 = 2.0 * a / b, x0 = 2.0 * d0;
    const double B1a = c.b1(x1), B2a = c.b2(x1), Ba = c.b(x1);
    const double B0 = c.b(x0), B10 = c.b1(x0), B20 = c.b2(x0);
    const double smt = std::sqrt(mu * t);

    OneRsbEval r{};
    r.e1 = -2.0 * B1a + 2.0 * B10 - (1.0 / (a * a) - mu * t) / (b * m * t);
    r.e2 = Ba - B0 + 2.0 * B10 * dl - (1.0 / (b * b * m * m * t)) * (1.0 / a - smt) + (mu / (b * m)) * dl;

    const double dl_a = -1.0 / (b * m), dl_m = -dl / m;
    const double d0_a = 1.0 / b + dl_a, d0_m = dl_m;
    const double e1a = -(4.0 / b) * B2a + 4.0 * B20 * d0_a + 2.0 / (a * a * a * b * m * t);
    const double e1m = 4.0 * B20 * d0_m + (1.0 / (a * a) - mu * t) / (b * m * m * t);
    const double e2a = (2.0 / b) * B1a - 2.0 * B10 * d0_a + 4.0 * B20 * d0_a * dl + 2.0 * B10 * dl_a +
                       1.0 / (a * a * b * b * m * m * t) + (mu / (b * m)) * dl_a;
    const double e2m = -2.0 * B10 * d0_m + 4.0 * B20 * d0_m * dl + 2.0 * B10 * dl_m +
                       (2.0 / (b * b * m * m * m * t)) * (1.0 / a - smt) - (mu / (b * m * m)) * dl +
                       (mu / (b * m)) * dl_m;
    r.r1 = r.e1 / eps;
    r.r2 = r.e2 / (eps * eps);
    r.jac = {e1a / eps + r.e1 / (eps * eps), e1m / eps, e2a / (eps * eps) + 2.0 * r.e2 / (eps * eps * eps),
             e2m / (eps * eps)};
    r.delta = dl;
    r.q0 = -B10 / std::sqrt(mu * mu * mu * t);
    r.q_star = r.q0 + dl;
    r.q_c = r.q_star + a / b;
    return r;
}

RsbSolution solve_1rsb(const ModelParams& p, const Correlator& c) {
    p.validate();
    const UbShape shape = ub_shape(c, p.t);
    if (shape != UbShape::strictly_convex && shape != UbShape::linear)
        throw PreconditionError("solve_1rsb: U_B must be convex or linear");
    if (is_rs(p, c)) throw PreconditionError("solve_1rsb: the model is RS at these parameters");
    const double sb = s_bar(p);

    double best_res = std::numeric_limits<double>::infinity();
    std::optional<std::pair<double, double>> best;
    const double afr[4] = {0.05, 0.25, 0.5, 0.85};
    const double mst[4] = {0.05, 0.2, 0.5, 0.95};
    for (double af : afr)
        for (double m0 : mst) {
            double a = af * sb, m = m0;
            OneRsbEval ev = one_rsb_system(p, c, a, m);
            double nrm = std::hypot(ev.r1, ev.r2);
            for (int it = 0; it < 200 && std::isfinite(nrm); ++it) {
                const auto& J = ev.jac;
                const double det = J[0] * J[3] - J[1] * J[2];
                if (det == 0 || !std::isfinite(det)) break;
                const double da = -(J[3] * ev.r1 - J[1] * ev.r2) / det;
                const double dm = -(-J[2] * ev.r1 + J[0] * ev.r2) / det;
                double lam = 1.0;
                bool moved = false;
                for (int h = 0; h < 60; ++h, lam *= 0.5) {
                    const double an = a + lam * da, mn = m + lam * dm;
                    if (!(an > 0 && an < sb && mn > 0 && mn <= 1.0)) continue;
                    const OneRsbEval en = one_rsb_system(p, c, an, mn);
                    const double nn = std::hypot(en.r1, en.r2);
                    if (std::isfinite(nn) && nn < nrm) {
                        a = an;
                        m = mn;
                        ev = en;
                        nrm = nn;
                        moved = true;
                        break;
                    }
                }
                if (!moved || nrm < 1e-15) break;
            }
            const double res = std::hypot(ev.e1, ev.e2);
            const bool ordered = ev.q0 > 0 && ev.q0 < ev.q_star && ev.q_star < ev.q_c;
            if (ordered && std::isfinite(res) && res < best_res) {
                best_res = res;
                best = {a, m};
            }
        }
    if (!best || !(best_res <= 1e-10)) {
        std::ostringstream os;
        os << "solve_1rsb: F(q_*) = 0 and int F = 0 not solved; best residual " << best_res;
        throw NonConvergence(os.str(), best_res);
    }
    const auto [a, m] = *best;
    const OneRsbEval ev = one_rsb_system(p, c, a, m);
    RsbSolution sol;
    sol.phase = Phase::ONE_RSB;
    sol.q_c = ev.q_c;
    sol.measure = ParisiMeasure::one_rsb(ev.q_c, ev.q0, ev.q_star, m);
    const auto k = ResolventKernel::continuum(p.t);
    sol.free_energy = eval_functional(k, p, c, sol.q_c, sol.measure);
    sol.residuals = stationarity_residuals(k, p, c, sol.q_c, sol.measure);
    sol.residuals.extra["F_q0"] = big_f(k, p, c, sol.q_c, sol.measure, ev.q0);
    sol.residuals.extra["F_q_star_equation"] = ev.e1;
    sol.residuals.extra["int_F_equation"] = ev.e2;
    // beta (q_c - q_* + m (q_* - q_0)) = 1/sqrt(mu t)
    sol.residuals.extra["explicit_equation"] = p.beta * (ev.q_c - ev.q_star + m * ev.delta) - s_bar(p);
    sol.extras = {{"m", m}, {"q0", ev.q0}, {"q_star", ev.q_star}, {"a", a}};
    return sol;
}

RsbSolution solve_frsb(const ModelParams& p, const Correlator& c) {
    p.validate();
    if (ub_shape(c, p.t) != UbShape::strictly_concave)
        throw PreconditionError("solve_frsb: U_B must be strictly concave");
    const auto ml = larkin_mass(p.beta, p.t, c);
    if (!ml || !(p.mu < *ml)) throw PreconditionError("solve_frsb: need mu below the Larkin mass");
    const double b = p.beta, t = p.t, mu = p.mu;
    const double smt3 = std::sqrt(mu * mu * mu * t);
    const double D = 1.0 / (b * std::sqrt(*ml * t));

    // 2 B''(2E) = sqrt(mu^3 t), B'' decreasing
    auto h = [&](double e) { return 2.0 * c.b2(2.0 * e) - smt3; };
    if (!(h(0.0) > 0)) throw NonConvergence("solve_frsb: 2B''(2(q_c - q_0)) = sqrt(mu^3 t) has no root", h(0.0));
    double lo = 0.0, hi = std::max(1.0, D);
    for (int i = 0; i < 2000 && h(hi) > 0; ++i) hi *= 2.0;
    for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) > 0) lo = mid;
        else hi = mid;
    }
    const double E = 0.5 * (lo + hi);
    if (!(E > D)) throw NonConvergence("solve_frsb: q_c - q_0 does not exceed q_c - q_*", D - E);

    const double q0 = -c.b1(2.0 * E) / smt3;
    const double qc = q0 + E;
    const double qs = qc - D;

    Segment mid;
    mid.a = q0;
    mid.b = qs;
    mid.beta = b;
    mid.t = t;
    mid.qc = qc;
    if (c.kind() == CorrKind::power_law) {
        const double gm = c.gamma();
        mid.kind = SegKind::frsb_power_law;
        mid.gamma = gm;
        mid.pa = c.a();
        mid.coef = 2.0 * (gm + 2.0) / (3.0 * b) * std::cbrt(1.0 / (2.0 * t * c.g() * gm * (gm + 1.0)));
    } else {
        mid.kind = SegKind::frsb_general;
        mid.corr = std::make_shared<const Correlator>(c);
    }
    std::vector<Segment> segs;
    if (q0 > 0) segs.push_back({0.0, q0, SegKind::constant, 0.0});
    segs.push_back(mid);
    segs.push_back({qs, qc, SegKind::constant, 1.0});

    RsbSolution sol;
    sol.phase = Phase::FRSB;
    sol.q_c = qc;
    sol.measure = ParisiMeasure(qc, std::move(segs));
    const auto k = ResolventKernel::continuum(t);
    sol.free_energy = eval_functional(k, p, c, qc, sol.measure);
    sol.residuals = stationarity_residuals(k, p, c, qc, sol.measure);

    const double q0_printed = -c.b1(2.0 * E) * mu * mu * mu * t;
    sol.extras = {{"q0", q0},
                  {"q_star", qs},
                  {"mu_larkin", *ml},
                  {"q0_stationarity", q0},
                  {"q0_printed_equation", q0_printed}};
    sol.residuals.extra["F_q0_stationarity"] = -2.0 * c.b1(2.0 * E) - 2.0 * q0 * smt3;
    sol.extras["F_q0_printed_equation"] = -2.0 * c.b1(2.0 * E) - 2.0 * q0_printed * smt3;
    if (c.kind() == CorrKind::power_law && c.g() == 1.0 && c.a() == 1.0) {
        const double gm = c.gamma();
        const double c0 = std::pow(2.0 * gm * (gm + 1.0) / std::sqrt(t), 1.0 / (gm + 2.0));
        const double c1 = gm * t / std::pow(c0, 1.0 + gm);
        sol.extras["q0_printed_closed_form"] = c1 * std::pow(mu, 3.0 * (gm + 1.0) / (2.0 * (gm + 2.0)) + 3.0);
        sol.extras["qc_minus_q0_closed_form"] = 0.5 * (c0 / std::pow(mu, 3.0 / (2.0 * (gm + 2.0))) - 1.0);
    }
    const double worst = std::max(std::abs(sol.residuals.larkin_residual), sol.residuals.extra["F_on_support_max"]);
    if (!(worst <= 1e-8)) {
        std::ostringstream os;
        os << "solve_frsb: stationarity residual " << worst << " above 1e-8 (q0 stationarity " << q0
           << ", q0 printed equation " << q0_printed << ")";
        throw NonConvergence(os.str(), worst);
    }
    return sol;
}

Phase classify(const ModelParams& p, const Correlator& c) {
    const UbShape shape = ub_shape(c, p.t);
    if (shape == UbShape::indeterminate && !c.is_zero())
        throw UnsupportedCorrelator("classify: U_B is neither convex, concave nor linear for " + c.describe());
    if (is_rs(p, c)) return Phase::RS;
    if (shape == UbShape::strictly_concave) return Phase::FRSB;
    return Phase::ONE_RSB;
}

RsbSolution solve(const ModelParams& p, const Correlator& c) {
    switch (classify(p, c)) {
        case Phase::RS: return solve_rs(p, c);
        case Phase::ONE_RSB: return solve_1rsb(p, c);
        default: return solve_frsb(p, c);
    }
}

PhaseBoundaryCurve phase_boundary(double t, const Correlator& c, const std::vector<double>& beta_grid, double mu_min,
                                  double mu_max, int threads) {
    if (!std::is_sorted(beta_grid.begin(), beta_grid.end()))
        throw std::invalid_argument("phase_boundary: beta grid must be sorted");
    PhaseBoundaryCurve curve;
    curve.t = t;
    curve.corr = c;
    curve.massless_intercept = massless_transition_beta(t, c);
    std::vector<std::optional<BoundaryPoint>> pts(beta_grid.size());
    parallel_for(beta_grid.size(), threads, [&](size_t ib) {
        const double beta = beta_grid[ib];
        auto rs = [&](double lmu) { return is_rs({beta, std::exp(lmu), t, std::nullopt}, c); };
        const double l0 = std::log(mu_min), l1 = std::log(mu_max);
        const int n = static_cast<int>(16 * std::log10(mu_max / mu_min));
        std::vector<double> flips;
        bool prev = rs(l0);
        for (int i = 1; i <= n; ++i) {
            const double lb = l0 + (l1 - l0) * i / n;
            const bool cur = rs(lb);
            if (cur != prev) {
                double a = l0 + (l1 - l0) * (i - 1) / n, b = lb;
                while (b - a > 1e-6) {
                    const double m = 0.5 * (a + b);
                    if (rs(m) == prev) a = m;
                    else b = m;
                }
                flips.push_back(std::exp(0.5 * (a + b)));
            }
            prev = cur;
        }
        if (flips.empty()) return;
        const double mb = flips.back();
        BoundaryPoint bp{beta, mb, Phase::RS, Phase::RS, flips};
        bp.phase_left = classify({beta, mb * (1 - 1e-3), t, std::nullopt}, c);
        bp.phase_right = classify({beta, mb * (1 + 1e-3), t, std::nullopt}, c);
        pts[ib] = bp;
    });
    for (auto& p : pts)
        if (p) curve.points.push_back(*p);
    return curve;
}

std::optional<double> massless_transition_beta(double t, const Correlator& c) {
    if (!(t > 0)) throw std::invalid_argument("massless_transition_beta: t must be positive");
    double W = 0;
    switch (c.kind()) {
        case CorrKind::exponential: W = c.g() / (c.a() * std::exp(1.0)); break;
        case CorrKind::power_law: {
            const double gm = c.gamma();
            if (gm < 1.0) return std::nullopt;
            if (gm == 1.0) {
                W = c.g();
                break;
            }
            const double w = c.a() / (gm - 1.0);
            W = c.g() * w * std::pow(c.a() + w, -gm);
            break;
        }
        default: {
            if (c.is_zero()) return std::nullopt;
            auto wb = [&](double lw) { return std::exp(lw) * c.b(std::exp(lw)); };
            const int n = 1600;
            const double l0 = std::log(1e-8), l1 = std::log(1e8);
            int ibest = 0;
            double vbest = -1;
            for (int i = 0; i <= n; ++i) {
                const double v = wb(l0 + (l1 - l0) * i / n);
                if (v > vbest) {
                    vbest = v;
                    ibest = i;
                }
            }
            if (ibest == n) {
                if (c.c0() > 0) return std::nullopt;
                W = vbest;
            } else {
                const double lo = l0 + (l1 - l0) * std::max(0, ibest - 1) / n;
                const double hi = l0 + (l1 - l0) * std::min(n, ibest + 1) / n;
                W = wb(brent_max(wb, lo, hi));
            }
        }
    }
    if (!(W > 0)) return std::nullopt;
    return std::cbrt(2.0 / (t * W));
}

}  // namespace epoly
