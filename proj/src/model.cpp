#include "epoly/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epoly {

void ModelParams::validate() const {
    if (!(beta > 0) || !(mu > 0) || !(t > 0))
        throw std::invalid_argument("model parameters beta, mu, t must be positive");
    if (lattice_size && *lattice_size < 1) throw std::invalid_argument("lattice size must be >= 1");
}

std::string to_string(SegKind k) {
    switch (k) {
        case SegKind::constant: return "constant";
        case SegKind::frsb_power_law: return "frsb_power_law";
        case SegKind::frsb_general: return "frsb_general";
        default: return "sampled";
    }
}

std::string to_string(Phase p) {
    switch (p) {
        case Phase::RS: return "RS";
        case Phase::ONE_RSB: return "ONE_RSB";
        default: return "FRSB";
    }
}

double Segment::cdf(double s) const {
    switch (kind) {
        case SegKind::constant: return value;
        case SegKind::frsb_power_law: {
            const double x = pa + 2.0 * (qc - (s - shift));
            return coef * std::pow(x, (gamma - 1.0) / 3.0);
        }
        case SegKind::frsb_general: return ub_prime(*corr, qc - (s - shift), t) / beta;
        default: {
            if (s <= xs.front()) return ys.front();
            if (s >= xs.back()) return ys.back();
            const auto it = std::upper_bound(xs.begin(), xs.end(), s);
            const size_t j = static_cast<size_t>(it - xs.begin());
            const double w = (s - xs[j - 1]) / (xs[j] - xs[j - 1]);
            return ys[j - 1] + w * (ys[j] - ys[j - 1]);
        }
    }
}

double Segment::integral(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    switch (kind) {
        case SegKind::constant: return value * (hi - lo);
        case SegKind::frsb_power_law: {
            const double p1 = (gamma - 1.0) / 3.0 + 1.0;
            const double xl = pa + 2.0 * (qc - (lo - shift));
            const double xh = pa + 2.0 * (qc - (hi - shift));
            return coef / (2.0 * p1) * (std::pow(xl, p1) - std::pow(xh, p1));
        }
        case SegKind::frsb_general:
            return (ub(*corr, qc - (lo - shift), t) - ub(*corr, qc - (hi - shift), t)) / beta;
        default: {
            // exact for piecewise-linear interpolation
            double acc = 0;
            double x0 = lo, y0 = cdf(lo);
            auto it = std::upper_bound(xs.begin(), xs.end(), lo);
            for (; it != xs.end() && *it < hi; ++it) {
                const double y1 = ys[static_cast<size_t>(it - xs.begin())];
                acc += 0.5 * (y0 + y1) * (*it - x0);
                x0 = *it;
                y0 = y1;
            }
            acc += 0.5 * (y0 + cdf(hi)) * (hi - x0);
            return acc;
        }
    }
}

ParisiMeasure::ParisiMeasure(double q, std::vector<Segment> segments) : q_(q), segs_(std::move(segments)) {
    build();
}

void ParisiMeasure::build() {
    if (!(q_ > 0)) throw std::invalid_argument("ParisiMeasure: q must be positive");
    if (segs_.empty()) throw std::invalid_argument("ParisiMeasure: no segments");
    // merge adjacent constant pieces with equal value, drop empty pieces
    std::vector<Segment> merged;
    for (auto& s : segs_) {
        if (s.b <= s.a) continue;
        if (!merged.empty() && merged.back().kind == SegKind::constant && s.kind == SegKind::constant &&
            merged.back().value == s.value) {
            merged.back().b = s.b;
            continue;
        }
        merged.push_back(s);
    }
    segs_ = std::move(merged);
    if (segs_.empty()) throw std::invalid_argument("ParisiMeasure: all segments empty");
    const double tol = 1e-12 * std::max(1.0, q_);
    if (std::abs(segs_.front().a) > tol) throw std::invalid_argument("ParisiMeasure: segments must start at 0");
    segs_.front().a = 0.0;
    for (size_t i = 1; i < segs_.size(); ++i) {
        if (std::abs(segs_[i].a - segs_[i - 1].b) > tol)
            throw std::invalid_argument("ParisiMeasure: segments must be contiguous");
        segs_[i].a = segs_[i - 1].b;
    }
    if (std::abs(segs_.back().b - q_) > tol) throw std::invalid_argument("ParisiMeasure: segments must end at q");
    segs_.back().b = q_;
    const Segment& last = segs_.back();
    if (last.kind != SegKind::constant || std::abs(last.value - 1.0) > 1e-12)
        throw std::invalid_argument("ParisiMeasure: CDF must equal 1 on [q_*, q]");
    q_star_ = last.a;
    if (!(q_star_ < q_)) throw std::invalid_argument("ParisiMeasure: support must not contain q");
    // monotonicity across and within pieces (checked at endpoints and midpoints)
    double prev = 0.0;
    for (const auto& s : segs_) {
        const double m = 0.5 * (s.a + s.b);
        const double v0 = s.cdf(s.a), v1 = s.cdf(m), v2 = s.cdf(std::nextafter(s.b, s.a));
        if (v0 < prev - 1e-12 || v1 < v0 - 1e-12 || v2 < v1 - 1e-12 || v0 < -1e-12 || v2 > 1.0 + 1e-12)
            throw std::invalid_argument("ParisiMeasure: CDF must be nondecreasing with values in [0,1]");
        prev = v2;
    }
    delta_at_b_.assign(segs_.size(), 0.0);
    double acc = 0.0;
    for (size_t i = segs_.size(); i-- > 0;) {
        delta_at_b_[i] = acc;
        acc += segs_[i].integral(segs_[i].a, segs_[i].b);
    }
}

ParisiMeasure ParisiMeasure::dirac(double q, double q_star) {
    if (!(q_star >= 0) || !(q_star < q)) throw std::invalid_argument("dirac: need 0 <= q_* < q");
    std::vector<Segment> s;
    if (q_star > 0) s.push_back({0.0, q_star, SegKind::constant, 0.0});
    s.push_back({q_star, q, SegKind::constant, 1.0});
    return ParisiMeasure(q, std::move(s));
}

ParisiMeasure ParisiMeasure::one_rsb(double q, double q0, double q_star, double m) {
    if (!(0 <= q0 && q0 < q_star && q_star < q) || !(m > 0 && m <= 1))
        throw std::invalid_argument("one_rsb: need 0 <= q0 < q_* < q and 0 < m <= 1");
    return from_atoms(q, {{q0, m}, {q_star, 1.0 - m}});
}

ParisiMeasure ParisiMeasure::from_atoms(double q, std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    double total = 0;
    for (auto& [x, w] : atoms) {
        if (!(x >= 0 && x < q) || !(w >= 0)) throw std::invalid_argument("from_atoms: bad atom");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("from_atoms: masses must sum to 1");
    std::vector<Segment> s;
    double pos = 0.0, c = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        const auto& [x, w] = atoms[i];
        if (x > pos) s.push_back({pos, x, SegKind::constant, c});
        pos = x;
        c = (i + 1 == atoms.size()) ? 1.0 : c + w;
    }
    s.push_back({pos, q, SegKind::constant, 1.0});
    return ParisiMeasure(q, std::move(s));
}

ParisiMeasure ParisiMeasure::sampled(double q, std::vector<double> xs, std::vector<double> ys, double q_star) {
    std::vector<Segment> s;
    Segment seg;
    seg.a = 0.0;
    seg.b = q_star;
    seg.kind = SegKind::sampled;
    seg.xs = std::move(xs);
    seg.ys = std::move(ys);
    if (q_star > 0) s.push_back(std::move(seg));
    s.push_back({q_star, q, SegKind::constant, 1.0});
    return ParisiMeasure(q, std::move(s));
}

int ParisiMeasure::find(double s) const {
    if (s >= q_) return static_cast<int>(segs_.size()) - 1;
    int lo = 0, hi = static_cast<int>(segs_.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (segs_[static_cast<size_t>(mid)].a <= s) lo = mid;
        else hi = mid - 1;
    }
    return lo;
}

double ParisiMeasure::cdf(double s) const {
    if (!(s >= 0) || s > q_) throw std::domain_error("cdf: s outside [0, q]");
    return segs_[static_cast<size_t>(find(s))].cdf(s);
}

double ParisiMeasure::delta(double s) const {
    if (!(s >= 0) || s > q_) throw std::domain_error("delta: s outside [0, q]");
    const size_t i = static_cast<size_t>(find(s));
    return delta_at_b_[i] + segs_[i].integral(s, segs_[i].b);
}

double ParisiMeasure::support_min() const {
    for (const auto& s : segs_) {
        if (s.kind == SegKind::constant) {
            if (s.value > 0) return s.a;
            continue;
        }
        if (s.kind == SegKind::sampled) {
            for (size_t j = 0; j < s.xs.size(); ++j)
                if (s.ys[j] > 0) return j == 0 ? s.a : std::max(s.a, s.xs[j - 1]);
            continue;
        }
        return s.a;
    }
    return q_star_;
}

ParisiMeasure ParisiMeasure::translate(double r) const {
    if (!(r > -support_min())) throw std::invalid_argument("translate: need r > -inf(support)");
    std::vector<Segment> out;
    if (r > 0) out.push_back({0.0, r, SegKind::constant, 0.0});
    for (auto s : segs_) {
        s.a += r;
        s.b += r;
        if (s.b <= 0) continue;
        if (s.a < 0) s.a = 0;
        s.shift += r;
        for (auto& x : s.xs) x += r;
        out.push_back(std::move(s));
    }
    return ParisiMeasure(q_ + r, std::move(out));
}

std::vector<std::pair<double, double>> ParisiMeasure::atoms() const {
    std::vector<std::pair<double, double>> out;
    double left = 0.0;
    for (const auto& s : segs_) {
        const double jump = s.cdf(s.a) - left;
        if (jump > 1e-15) out.emplace_back(s.a, jump);
        left = s.cdf(std::nextafter(s.b, s.a));
        if (s.kind == SegKind::constant) left = s.value;
    }
    return out;
}

std::vector<double> ParisiMeasure::breakpoints() const {
    std::vector<double> out;
    for (const auto& s : segs_) out.push_back(s.a);
    out.push_back(q_);
    return out;
}

bool ParisiMeasure::in_support(double s, double tol) const {
    for (const auto& [x, w] : atoms())
        if (std::abs(s - x) <= tol) return true;
    for (const auto& seg : segs_) {
        if (s < seg.a - tol || s > seg.b + tol) continue;
        if (seg.kind == SegKind::frsb_power_law || seg.kind == SegKind::frsb_general) return true;
        if (seg.kind == SegKind::sampled) {
            for (size_t j = 1; j < seg.xs.size(); ++j)
                if (s >= seg.xs[j - 1] - tol && s <= seg.xs[j] + tol && seg.ys[j] > seg.ys[j - 1]) return true;
        }
    }
    return false;
}

nlohmann::json ParisiMeasure::to_json() const {
    nlohmann::json j;
    j["q"] = q_;
    j["q_star"] = q_star_;
    auto segs = nlohmann::json::array();
    for (const auto& s : segs_) {
        nlohmann::json e{{"a", s.a}, {"b", s.b}, {"kind", to_string(s.kind)}};
        switch (s.kind) {
            case SegKind::constant: e["value"] = s.value; break;
            case SegKind::frsb_power_law:
                e["params"] = {{"gamma", s.gamma}, {"coef", s.coef}, {"a", s.pa}, {"q_c", s.qc}, {"shift", s.shift}};
                break;
            case SegKind::frsb_general:
                e["params"] = {{"beta", s.beta}, {"t", s.t}, {"q_c", s.qc}, {"shift", s.shift},
                               {"correlator", s.corr ? s.corr->describe() : ""}};
                break;
            default: e["x"] = s.xs; e["y"] = s.ys;
        }
        segs.push_back(e);
    }
    j["segments"] = segs;
    auto at = nlohmann::json::array();
    for (const auto& [x, w] : atoms()) at.push_back({{"location", x}, {"mass", w}});
    j["atoms"] = at;
    return j;
}

double cdf(const ParisiMeasure& z, double s) { return z.cdf(s); }
double delta(const ParisiMeasure& z, double s) { return z.delta(s); }
ParisiMeasure translate(const ParisiMeasure& z, double r) { return z.translate(r); }

double cdf_distance(const ParisiMeasure& a, const ParisiMeasure& b, int n) {
    const double Q = std::min(a.q(), b.q());
    double d = 0;
    for (int i = 0; i < n; ++i) {
        const double s = Q * i / (n - 1);
        d = std::max(d, std::abs(a.cdf(s) - b.cdf(s)));
    }
    return d;
}

double StationarityResiduals::max_abs() const {
    double m = std::max({std::abs(larkin_residual), std::abs(support_max_f_gap), std::abs(offsupport_violation)});
    for (const auto& [k, v] : extra) m = std::max(m, std::abs(v));
    return m;
}

nlohmann::json StationarityResiduals::to_json(bool with_f) const {
    nlohmann::json j{{"larkin_residual", larkin_residual},
                     {"support_max_f_gap", support_max_f_gap},
                     {"offsupport_violation", offsupport_violation},
                     {"offsupport_margin", offsupport_margin}};
    for (const auto& [k, v] : extra) j[k] = v;
    j["max_abs"] = max_abs();
    if (with_f) {
        auto arr = nlohmann::json::array();
        for (const auto& [s, f] : f_values) arr.push_back({s, f});
        j["f_values"] = arr;
    }
    return j;
}

nlohmann::json RsbSolution::to_json() const {
    nlohmann::json j;
    j["phase"] = to_string(phase);
    j["q_c"] = q_c;
    j["q_star"] = q_star();
    j["free_energy"] = free_energy;
    for (const auto& [k, v] : extras) j["extras"][k] = v;
    j["residuals"] = residuals.to_json();
    j["measure"] = measure.to_json();
    return j;
}

}  // namespace epoly
