#include "epoly/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace epoly {

namespace {

constexpr double kPi = std::numbers::pi;

// sin^2(pi k j / L) with the product reduced mod L first.
double sin2_frac(long k, long j, long L) {
    const long r = static_cast<long>((static_cast<__int128>(k) * j) % L);
    const double s = std::sin(kPi * static_cast<double>(r) / static_cast<double>(L));
    return s * s;
}

double cos_frac(long k, long j, long L) {
    const long r = static_cast<long>((static_cast<__int128>(k) * j) % L);
    return std::cos(2.0 * kPi * static_cast<double>(r) / static_cast<double>(L));
}

// Root of a decreasing function; fd(x) returns (f(x), f'(x)).  Safeguarded Newton on a bracket.
template <class FD>
double invert_decreasing(FD fd, double target, double guess) {
    double lo = guess * 1e-3, hi = guess * 1e3;
    double flo = fd(lo).first, fhi = fd(hi).first;
    for (int i = 0; i < 200 && flo < target; ++i) flo = fd(lo *= 1e-3).first;
    for (int i = 0; i < 200 && fhi > target; ++i) fhi = fd(hi *= 1e3).first;
    if (!(flo >= target) || !(fhi <= target)) throw InternalError("inversion: bracket expansion failed");
    double x = std::clamp(guess, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const auto [f, df] = fd(x);
        const double fx = f - target;
        if (fx == 0.0) return x;
        if (fx > 0) lo = x;
        else hi = x;
        if (std::abs(fx) <= 1e-15 * std::abs(target) || (hi - lo) <= 1e-15 * hi) return x;
        double xn = x + fx / (-df);
        if (!(xn > lo && xn < hi)) xn = std::sqrt(lo * hi);
        if (std::abs(xn - x) <= 1e-16 * x) return xn;
        x = xn;
    }
    throw InternalError("inversion did not converge in 200 iterations");
}

double ipow_inv(double d, int p) {
    switch (p) {
        case 1: return 1.0 / d;
        case 2: return 1.0 / (d * d);
        case 3: return 1.0 / (d * d * d);
        default: return std::pow(d, -p);
    }
}

// per-thread memo of lattice K and K'
struct KMemo {
    const void* spec;
    double t, x;
    bool operator<(const KMemo& o) const { return std::tie(spec, t, x) < std::tie(o.spec, o.t, o.x); }
};
thread_local std::map<KMemo, std::pair<double, double>> k_memo;

}  // namespace

std::vector<double> laplacian_eigenvalues(long L) {
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    std::vector<double> ev(static_cast<size_t>(L));
    for (long k = 0; k < L; ++k) {
        const double s = std::sin(kPi * k / static_cast<double>(L));
        ev[static_cast<size_t>(k)] = -4.0 * L * s * s;
    }
    return ev;
}

std::shared_ptr<const FoldedSpectrum> folded_spectrum(long L) {
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    static std::mutex m;
    static std::map<long, std::shared_ptr<const FoldedSpectrum>> cache;
    {
        std::lock_guard<std::mutex> lk(m);
        auto it = cache.find(L);
        if (it != cache.end()) return it->second;
    }
    auto fs = std::make_shared<FoldedSpectrum>();
    fs->L = L;
    const long half = L / 2;
    for (long k = 0; k <= half; ++k) {
        const double s = std::sin(kPi * k / static_cast<double>(L));
        fs->lam.push_back(4.0 * L * s * s);
        fs->k.push_back(k);
        fs->mult.push_back((k == 0 || (L % 2 == 0 && k == half)) ? 1.0 : 2.0);
    }
    std::lock_guard<std::mutex> lk(m);
    if (cache.size() > 64) cache.clear();
    cache[L] = fs;
    return fs;
}

CirculantSymbol CirculantSymbol::identity(long L) {
    CirculantSymbol c;
    c.first_row.assign(static_cast<size_t>(L), 0.0);
    c.first_row[0] = 1.0;
    return c;
}

CirculantSymbol CirculantSymbol::displacement(long L, long j) {
    CirculantSymbol c;
    c.first_row.assign(static_cast<size_t>(L), 0.0);
    j = ((j % L) + L) % L;
    if (j == 0) return c;
    c.first_row[0] += 2.0;
    c.first_row[static_cast<size_t>(j)] -= 1.0;
    c.first_row[static_cast<size_t>(L - j)] -= 1.0;
    return c;
}

void CirculantSymbol::validate() const {
    const size_t L = first_row.size();
    if (L == 0) throw std::invalid_argument("circulant symbol: empty first row");
    for (size_t j = 1; j < L; ++j)
        if (first_row[j] != first_row[L - j])
            throw std::invalid_argument("circulant symbol: first row is not symmetric");
}

std::vector<double> CirculantSymbol::folded_symbol() const {
    validate();
    const long L = static_cast<long>(first_row.size());
    std::vector<std::pair<long, double>> nz;
    for (long j = 0; j < L; ++j)
        if (first_row[static_cast<size_t>(j)] != 0.0) nz.emplace_back(j, first_row[static_cast<size_t>(j)]);
    std::vector<double> out(static_cast<size_t>(L / 2 + 1), 0.0);
    for (long k = 0; k <= L / 2; ++k) {
        double s = 0;
        for (const auto& [j, a] : nz) s += a * cos_frac(j, k, L);
        out[static_cast<size_t>(k)] = s;
    }
    return out;
}

ResolventKernel ResolventKernel::continuum(double t) {
    if (!(t > 0)) throw std::invalid_argument("kernel: t must be positive");
    ResolventKernel k;
    k.t_ = t;
    return k;
}

ResolventKernel ResolventKernel::lattice(long L, double t) {
    if (!(t > 0)) throw std::invalid_argument("kernel: t must be positive");
    ResolventKernel k;
    k.L_ = L;
    k.t_ = t;
    k.spec_ = folded_spectrum(L);
    return k;
}

double ResolventKernel::resolvent_sum(double mu, int p) const {
    if (!(mu > 0)) throw std::domain_error("resolvent: mu must be positive");
    if (!is_lattice()) {
        // continuum closed forms for p = 1, 2; p = 3 follows by differentiation
        if (p == 1) return 1.0 / std::sqrt(mu * t_);
        if (p == 2) return 0.5 / std::sqrt(mu * mu * mu * t_);
        if (p == 3) return 0.375 / std::sqrt(mu * mu * mu * mu * mu * t_);
        throw std::invalid_argument("continuum resolvent_sum: p must be 1..3");
    }
    const auto& s = *spec_;
    double acc = 0;
    for (size_t i = 0; i < s.lam.size(); ++i) acc += s.mult[i] * ipow_inv(mu + t_ * s.lam[i], p);
    return acc / std::sqrt(static_cast<double>(L_));
}

double ResolventKernel::r1(double mu) const { return resolvent_sum(mu, 1); }
double ResolventKernel::r2(double mu) const { return resolvent_sum(mu, 2); }

std::pair<double, double> ResolventKernel::r1_r2(double mu) const {
    if (!is_lattice()) return {r1(mu), r2(mu)};
    if (!(mu > 0)) throw std::domain_error("resolvent: mu must be positive");
    const auto& s = *spec_;
    double a = 0, b = 0;
    for (size_t i = 0; i < s.lam.size(); ++i) {
        const double w = 1.0 / (mu + t_ * s.lam[i]);
        a += s.mult[i] * w;
        b += s.mult[i] * w * w;
    }
    const double n = std::sqrt(static_cast<double>(L_));
    return {a / n, b / n};
}

std::pair<double, double> ResolventKernel::k_and_r2(double x) const {
    const KMemo key{spec_.get(), t_, x};
    if (auto it = k_memo.find(key); it != k_memo.end()) return it->second;
    double last_m = 0, last_r2 = 0;
    const double kx = invert_decreasing(
        [&](double m) {
            const auto [a, b] = r1_r2(m);
            last_m = m, last_r2 = b;
            return std::pair{a, -b};
        },
        x, 0.25 / (x * x * t_));
    const double r2k = last_m == kx ? last_r2 : r2(kx);
    if (k_memo.size() > 200000) k_memo.clear();
    return k_memo[key] = {kx, r2k};
}

double ResolventKernel::k(double x) const {
    if (!(x > 0)) throw std::domain_error("K: argument must be positive");
    if (!is_lattice()) return 1.0 / (x * x * t_);
    return k_and_r2(x).first;
}

double ResolventKernel::k_prime(double x) const {
    if (!(x > 0)) throw std::domain_error("K': argument must be positive");
    if (!is_lattice()) return -2.0 / (x * x * x * t_);
    return -1.0 / k_and_r2(x).second;
}

double ResolventKernel::u_inv(double y) const {
    if (!(y > 0)) throw std::domain_error("U: argument must be positive");
    if (!is_lattice()) return std::cbrt(2.0 / (y * t_));
    // -K'(x) = 1/R2(K(x)) = y  <=>  x = R1(z) with R2(z) = 1/y
    const double guess = std::cbrt(y * y / (4.0 * t_));
    const double z = invert_decreasing(
        [&](double m) { return std::pair{r2(m), -2.0 * resolvent_sum(m, 3)}; }, 1.0 / y, guess);
    return r1(z);
}

double ResolventKernel::logdet_diff(double x, double y) const {
    if (!(x > 0) || !(y > 0)) throw std::domain_error("logdet_diff: arguments must be positive");
    if (!is_lattice()) return 2.0 * (std::sqrt(x) - std::sqrt(y)) / std::sqrt(t_);
    const auto& s = *spec_;
    double acc = 0;
    for (size_t i = 0; i < s.lam.size(); ++i) acc += s.mult[i] * std::log1p((x - y) / (y + t_ * s.lam[i]));
    return acc / std::sqrt(static_cast<double>(L_));
}

double ResolventKernel::k_antiderivative(double y, double ref) const {
    const double ky = k(y);
    return y * ky - logdet_diff(ky, ref);
}

double ResolventKernel::green(double mu, double x, int order) const {
    if (!(mu > 0)) throw std::domain_error("green: mu must be positive");
    if (order != 0 && order != 1) throw std::domain_error("green: order must be 0 or 1");
    if (!is_lattice()) return green_continuum(mu, x, t_, order);
    const long j = lattice_index(L_, x);
    if (j == 0) return 0.0;
    const auto& s = *spec_;
    double acc = 0;
    for (size_t i = 1; i < s.lam.size(); ++i) {
        // cos(2 pi k j / L) - 1 = -2 sin^2(pi k j / L)
        const double w = -2.0 * sin2_frac(s.k[i], j, L_) * s.mult[i];
        const double d = mu + t_ * s.lam[i];
        acc += order == 0 ? w / d : -w / (d * d);
    }
    return acc / std::sqrt(static_cast<double>(L_));
}

double ResolventKernel::circulant_resolvent(const std::vector<double>& sym, double u, int p) const {
    if (!is_lattice()) throw std::invalid_argument("circulant_resolvent needs a lattice kernel");
    const auto& s = *spec_;
    if (sym.size() != s.lam.size()) throw std::invalid_argument("circulant symbol size mismatch");
    double acc = 0;
    for (size_t i = 0; i < s.lam.size(); ++i) acc += s.mult[i] * sym[i] * ipow_inv(u + t_ * s.lam[i], p);
    return acc / std::sqrt(static_cast<double>(L_));
}

long lattice_index(long L, double x) {
    const double v = std::sqrt(static_cast<double>(L)) * x;
    const long j = static_cast<long>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v))));
    return ((j % L) + L) % L;
}

double logdet(long L, double t, double mu) {
    const auto s = folded_spectrum(L);
    double acc = 0;
    for (size_t i = 0; i < s->lam.size(); ++i) acc += s->mult[i] * std::log(mu + t * s->lam[i]);
    return acc;
}

double logdet_asymptotic(long L, double t, double mu) {
    const double Ld = static_cast<double>(L);
    return Ld * std::log(Ld) + Ld * std::log(t) + 2.0 * std::sqrt(Ld) * std::sqrt(mu / t);
}

double log_pseudo_det(long L) {
    const auto s = folded_spectrum(L);
    double acc = 0;
    for (size_t i = 1; i < s->lam.size(); ++i) acc += s->mult[i] * std::log(s->lam[i] / static_cast<double>(L));
    return acc;
}

double pseudo_det(long L) { return std::exp(log_pseudo_det(L)); }

double heat_trace(long L, double time) {
    const auto s = folded_spectrum(L);
    double acc = 0;
    for (size_t i = 0; i < s->lam.size(); ++i) acc += s->mult[i] * std::exp(-time * s->lam[i]);
    return acc / std::sqrt(static_cast<double>(L));
}

double heat_entry(long L, double time, double x) {
    const long j = lattice_index(L, x);
    const auto s = folded_spectrum(L);
    double acc = 0;
    for (size_t i = 0; i < s->lam.size(); ++i) acc += s->mult[i] * cos_frac(s->k[i], j, L) * std::exp(-time * s->lam[i]);
    return acc / std::sqrt(static_cast<double>(L));
}

double green_continuum(double mu, double x, double t, int order) {
    const double z = std::abs(x) * std::sqrt(mu / t);
    if (order == 0) return std::expm1(-z) / (2.0 * std::sqrt(t * mu));
    double f;
    if (z < 1e-3) f = z * z * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0);
    else f = -std::expm1(-z) - z * std::exp(-z);
    return f / (4.0 * std::sqrt(t * mu * mu * mu));
}

}  // namespace epoly
