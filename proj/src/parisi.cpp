#include "epoly/parisi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace epoly {

ParisiMeasure with_radius(const ParisiMeasure& z, double q) {
    if (q == z.q()) return z;
    if (!(q > z.q_star())) throw std::domain_error("radius must exceed the top of the support");
    std::vector<Segment> segs = z.segments();
    segs.back().b = q;
    return ParisiMeasure(q, std::move(segs));
}

namespace {

// Sub-intervals of [a, b] on which the CDF of seg is smooth.
// Pieces are further split so that q - u shrinks by at most a factor 4 per piece.
std::vector<double> smooth_cuts(const Segment& seg, double a, double b, double q) {
    std::vector<double> cuts{a};
    if (seg.kind == SegKind::sampled)
        for (double x : seg.xs)
            if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    if (seg.kind == SegKind::constant) return cuts;
    std::vector<double> out{a};
    for (size_t i = 1; i < cuts.size(); ++i) {
        double d = q - out.back();
        while (q - cuts[i] < 0.25 * d) {
            d *= 0.25;
            out.push_back(q - d);
        }
        out.push_back(cuts[i]);
    }
    return out;
}

double piece(const ParisiMeasure& z, const Segment& seg, double beta, const DeltaFamily& fam, double a, double b,
             int moment, double s) {
    const double w0 = moment == 0 ? b - a : 0.5 * ((s - a) * (s - a) - (s - b) * (s - b));
    const double ya = beta * z.delta(a);
    if (seg.kind == SegKind::constant) {
        const double c = seg.value;
        if (c == 0.0) return fam.phi(ya) * w0;
        const double yb = beta * z.delta(b);
        const double bc = beta * c;
        const bool have = fam.Phi && (moment == 0 || fam.Psi);
        if (have && ya - yb > 1e-4 * ya) {
            const double m0 = (fam.Phi(ya) - fam.Phi(yb)) / bc;
            if (moment == 0) return m0;
            return -((s - b) * fam.Phi(yb) - (s - a) * fam.Phi(ya)) / bc - (fam.Psi(ya) - fam.Psi(yb)) / (bc * bc);
        }
        if (ya - yb <= 1e-4 * ya) {
            // nearly constant integrand: 3-point Gauss-Legendre
            const double m = 0.5 * (a + b), r = 0.5 * (b - a), e = r * std::sqrt(0.6);
            double acc = 0;
            for (auto [u, w] : {std::pair{m - e, 5.0 / 9.0}, std::pair{m, 8.0 / 9.0}, std::pair{m + e, 5.0 / 9.0}})
                acc += w * (moment == 0 ? 1.0 : s - u) * fam.phi(beta * z.delta(u));
            return acc * r;
        }
    }
    double acc = 0;
    const auto cuts = smooth_cuts(seg, a, b, z.q());
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        acc += integrate(
            [&](double u) {
                const double w = moment == 0 ? 1.0 : s - u;
                return w * fam.phi(beta * z.delta(u));
            },
            cuts[i], cuts[i + 1], 1e-10, "delta integral");
    }
    return acc;
}

DeltaFamily k_family(const ResolventKernel& k, double mu) {
    return {[&k](double y) { return k.k(y); }, [&k, mu](double y) { return k.k_antiderivative(y, mu); }, {}};
}

DeltaFamily kprime_family(const ResolventKernel& k, double mu) {
    return {[&k](double y) { return k.k_prime(y); }, [&k](double y) { return k.k(y); },
            [&k, mu](double y) { return k.k_antiderivative(y, mu); }};
}

void check_s(double s, double q) {
    if (!(s >= 0) || !(s < q)) throw std::domain_error("F, f: need 0 <= s < q");
}

}  // namespace

double delta_integral(const ParisiMeasure& z, double beta, const DeltaFamily& fam, double lo, double hi, int moment,
                      double s_ref) {
    if (hi <= lo) return 0.0;
    double acc = 0;
    for (const auto& seg : z.segments()) {
        const double a = std::max(lo, seg.a), b = std::min(hi, seg.b);
        if (b <= a) continue;
        acc += piece(z, seg, beta, fam, a, b, moment, s_ref);
    }
    return acc;
}

double cdf_b1_integral(const ParisiMeasure& z, const Correlator& c, double lo, double hi) {
    const double q = z.q();
    double acc = 0;
    for (const auto& seg : z.segments()) {
        const double a = std::max(lo, seg.a), b = std::min(hi, seg.b);
        if (b <= a) continue;
        if (seg.kind == SegKind::constant) {
            if (seg.value != 0.0) acc += seg.value * 0.5 * (c.b(2.0 * (q - a)) - c.b(2.0 * (q - b)));
            continue;
        }
        const auto cuts = smooth_cuts(seg, a, b, z.q());
        for (size_t i = 0; i + 1 < cuts.size(); ++i)
            acc += integrate([&](double u) { return seg.cdf(u) * c.b1(2.0 * (q - u)); }, cuts[i], cuts[i + 1], 1e-10,
                             "B' integral");
    }
    return acc;
}

double eval_functional(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q,
                       const ParisiMeasure& z) {
    p.validate();
    const ParisiMeasure zq = with_radius(z, q);
    const double beta = p.beta, qs = zq.q_star();
    const double y = beta * (q - qs);
    const double ky = k.k(y);
    const double t1 = k.logdet_diff(p.mu, ky);
    const double t2 = y * ky;
    const double t3 = beta * delta_integral(zq, beta, k_family(k, p.mu), 0.0, qs);
    const double t4 = -2.0 * beta * beta * cdf_b1_integral(zq, c, 0.0, q);
    const double t5 = -beta * p.mu * q;
    return 0.5 * (t1 + t2 + t3 + t4 + t5);
}

double eval_functional_definition(const ModelParams& p, const Correlator& c, double q, const ParisiMeasure& z) {
    p.validate();
    const ParisiMeasure zq = with_radius(z, q);
    const double beta = p.beta, t = p.t, qs = zq.q_star();
    const DeltaFamily fam{[&](double y) { return beta / (t * y * y); }, [&](double y) { return -beta / (t * y); }, {}};
    const double kin = delta_integral(zq, beta, fam, 0.0, qs) - 1.0 / (beta * t * (q - qs));
    const double pot = -2.0 * beta * beta * cdf_b1_integral(zq, c, 0.0, q);
    return 0.5 * (kin + pot - beta * p.mu * q + 2.0 * std::sqrt(p.mu / t));
}

double big_f(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q, const ParisiMeasure& z,
             double s) {
    check_s(s, q);
    const ParisiMeasure zq = with_radius(z, q);
    return -2.0 * c.b1(2.0 * (q - s)) + delta_integral(zq, p.beta, kprime_family(k, p.mu), 0.0, s);
}

double little_f(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q, const ParisiMeasure& z,
                double s) {
    check_s(s, q);
    const ParisiMeasure zq = with_radius(z, q);
    return c.b(2.0 * (q - s)) - c.b(2.0 * q) + delta_integral(zq, p.beta, kprime_family(k, p.mu), 0.0, s, 1, s);
}

FProfile f_profile(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q,
                   const ParisiMeasure& z, std::vector<double> grid) {
    const ParisiMeasure zq = with_radius(z, q);
    std::sort(grid.begin(), grid.end());
    const auto fam = kprime_family(k, p.mu);
    FProfile out;
    double prev = 0.0, J = 0.0, Jint = 0.0;
    for (double s : grid) {
        check_s(s, q);
        if (s > prev) {
            Jint += (s - prev) * J + delta_integral(zq, p.beta, fam, prev, s, 1, s);
            J += delta_integral(zq, p.beta, fam, prev, s, 0);
            prev = s;
        }
        out.s.push_back(s);
        out.big.push_back(-2.0 * c.b1(2.0 * (q - s)) + J);
        out.little.push_back(c.b(2.0 * (q - s)) - c.b(2.0 * q) + Jint);
    }
    return out;
}

StationarityResiduals stationarity_residuals(const ResolventKernel& k, const ModelParams& p, const Correlator& c,
                                             double q, const ParisiMeasure& z, int n_grid) {
    const ParisiMeasure zq = with_radius(z, q);
    StationarityResiduals r;
    r.larkin_residual = p.beta * zq.delta(0.0) - k.r1(p.mu);

    std::vector<double> grid;
    for (int i = 0; i < n_grid; ++i) grid.push_back(q * i / n_grid);
    for (double b : zq.breakpoints())
        if (b < q) grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [&](double a, double b) { return b - a <= 1e-14 * q; }),
               grid.end());

    FProfile prof = f_profile(k, p, c, q, zq, grid);
    std::vector<char> on(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) on[i] = zq.in_support(grid[i], 1e-12 * q);

    // refine off-support intervals where F changes sign
    std::vector<double> extra;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if (on[i] || on[i + 1]) continue;
        if ((prof.big[i] > 0) != (prof.big[i + 1] > 0))
            for (int j = 1; j < 10; ++j) extra.push_back(grid[i] + (grid[i + 1] - grid[i]) * j / 10.0);
    }
    if (!extra.empty()) {
        grid.insert(grid.end(), extra.begin(), extra.end());
        std::sort(grid.begin(), grid.end());
        prof = f_profile(k, p, c, q, zq, grid);
        on.assign(grid.size(), 0);
        for (size_t i = 0; i < grid.size(); ++i) on[i] = zq.in_support(grid[i], 1e-12 * q);
    }

    const double ninf = -std::numeric_limits<double>::infinity();
    double sup_all = ninf, sup_on = ninf, sup_off = ninf;
    for (size_t i = 0; i < grid.size(); ++i) {
        sup_all = std::max(sup_all, prof.little[i]);
        if (on[i]) sup_on = std::max(sup_on, prof.little[i]);
        else sup_off = std::max(sup_off, prof.little[i]);
    }
    double gap = 0, fmax_support = 0;
    for (size_t i = 0; i < grid.size(); ++i)
        if (on[i]) {
            gap = std::max(gap, std::abs(prof.little[i] - sup_all));
            fmax_support = std::max(fmax_support, std::abs(prof.big[i]));
        }
    r.support_max_f_gap = gap;
    r.offsupport_violation = sup_off == ninf ? 0.0 : std::max(0.0, sup_off - sup_on);
    r.offsupport_margin = sup_off == ninf ? std::numeric_limits<double>::infinity() : sup_on - sup_off;
    r.extra["F_on_support_max"] = fmax_support;
    r.extra["F_at_q_star"] = big_f(k, p, c, q, zq, zq.q_star());
    for (size_t i = 0; i < grid.size(); ++i) r.f_values.emplace_back(grid[i], prof.little[i]);
    return r;
}

double rs_free_energy(const ModelParams& p, const Correlator& c) {
    const double b = p.beta;
    return 0.5 * b * b * (c.b(0.0) - c.b(2.0 / (b * std::sqrt(p.mu * p.t))));
}

}  // namespace epoly
