#include "epoly/simulator.hpp"

#include "epoly/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace epoly {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                     static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(sq);
}

constexpr std::uint64_t kEnvTag = 0x656e76;

}  // namespace

EnvironmentRealization sample_environment(const Correlator& c, int N, int L, int M, std::uint64_t seed) {
    if (N < 1 || L < 1 || M < 1) throw std::invalid_argument("sample_environment: N, L, M must be >= 1");
    if (c.outside_assumptions())
        throw std::invalid_argument("sample_environment: constant part c0 > 0 has no feature representation");
    const Correlator mix = c.to_mixture();
    EnvironmentRealization env;
    env.N = N;
    env.L = L;
    env.M = M;
    env.seed = seed;
    env.n_atoms = static_cast<int>(mix.atoms().size());
    const size_t F = env.features_per_site();
    env.omega.resize(static_cast<size_t>(L) * F * N);
    env.phase.resize(static_cast<size_t>(L) * F);
    env.gain.resize(static_cast<size_t>(L) * F);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 2.0 * std::numbers::pi);
    for (int x = 0; x < L; ++x) {
        auto rng = make_rng(seed, kEnvTag, static_cast<std::uint64_t>(x));
        for (int i = 0; i < env.n_atoms; ++i) {
            const auto& at = mix.atoms()[static_cast<size_t>(i)];
            const double sd = std::sqrt(2.0 * at.lambda * at.lambda / N);
            const double amp = std::sqrt(N * at.weight * 2.0 / M);
            for (int m = 0; m < M; ++m) {
                const size_t f = static_cast<size_t>(x) * F + static_cast<size_t>(i) * M + m;
                for (int k = 0; k < N; ++k) env.omega[f * N + k] = sd * nd(rng);
                env.phase[f] = ud(rng);
                env.gain[f] = amp * nd(rng);
            }
        }
    }
    return env;
}

double EnvironmentRealization::potential(int x, const double* u) const {
    const size_t F = features_per_site();
    double v = 0;
    for (size_t f = static_cast<size_t>(x) * F; f < static_cast<size_t>(x + 1) * F; ++f) {
        const double* w = &omega[f * N];
        double arg = phase[f];
        for (int k = 0; k < N; ++k) arg += w[k] * u[k];
        v += gain[f] * std::cos(arg);
    }
    return v;
}

double EnvironmentRealization::potential_and_gradient(int x, const double* u, double scale, double* grad) const {
    const size_t F = features_per_site();
    double v = 0;
    for (size_t f = static_cast<size_t>(x) * F; f < static_cast<size_t>(x + 1) * F; ++f) {
        const double* w = &omega[f * N];
        double arg = phase[f];
        for (int k = 0; k < N; ++k) arg += w[k] * u[k];
        v += gain[f] * std::cos(arg);
        const double d = -scale * gain[f] * std::sin(arg);
        for (int k = 0; k < N; ++k) grad[k] += d * w[k];
    }
    return v;
}

namespace {

Config laplacian(const Config& u) {
    const long L = u.rows();
    Config out(u.rows(), u.cols());
    for (long x = 0; x < L; ++x)
        out.row(x) = static_cast<double>(L) * (u.row((x + 1) % L) + u.row((x + L - 1) % L) - 2.0 * u.row(x));
    return out;
}

// energy and gradient in one pass
double energy_grad(const Config& u, const EnvironmentRealization& env, const ModelParams& p, Config* g) {
    const long L = u.rows();
    const double sl = 1.0 / std::sqrt(static_cast<double>(L));
    const double ql = std::pow(static_cast<double>(L), -0.25);
    const Config lap = laplacian(u);
    double e = 0.5 * sl * (p.mu * u.squaredNorm() - p.t * (lap.array() * u.array()).sum());
    if (g) *g = sl * (p.mu * u - p.t * lap);
    for (long x = 0; x < L; ++x) {
        if (env.n_atoms == 0) break;
        if (g) e += ql * env.potential_and_gradient(static_cast<int>(x), u.row(x).data(), ql, g->row(x).data());
        else e += ql * env.potential(static_cast<int>(x), u.row(x).data());
    }
    return e;
}

}  // namespace

double hamiltonian(const Config& u, const EnvironmentRealization& env, const ModelParams& p) {
    return energy_grad(u, env, p, nullptr);
}

Config gradient(const Config& u, const EnvironmentRealization& env, const ModelParams& p) {
    Config g;
    energy_grad(u, env, p, &g);
    return g;
}

ChainStats run_chains(const ModelParams& p, const EnvironmentRealization& env, int n_replicas, int n_steps,
                      double step_size, std::uint64_t seed, std::uint64_t stream) {
    if (!(p.beta > 0) || !(step_size > 0)) throw std::invalid_argument("run_chains: beta and step size must be > 0");
    if (n_replicas < 1 || n_steps < 10) throw std::invalid_argument("run_chains: need replicas >= 1, steps >= 10");
    const int L = env.L, N = env.N;
    const double Ld = L;

    // prior covariance per coordinate: C = L^{1/2} (mu - t Delta)^{-1} / beta
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L, L);
    for (int x = 0; x < L; ++x) {
        A(x, x) += p.mu + 2.0 * p.t * Ld;
        A(x, (x + 1) % L) -= p.t * Ld;
        A(x, (x + L - 1) % L) -= p.t * Ld;
    }
    const Eigen::MatrixXd C = std::sqrt(Ld) / p.beta * A.inverse();
    const Eigen::MatrixXd P = p.beta / std::sqrt(Ld) * A;
    const Eigen::MatrixXd Lc = Eigen::LLT<Eigen::MatrixXd>(C).matrixL();

    std::vector<std::mt19937_64> rng;
    for (int r = 0; r < n_replicas; ++r) rng.push_back(make_rng(seed, stream, static_cast<std::uint64_t>(r)));
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    auto noise = [&](int r) {
        Config xi(L, N);
        for (int x = 0; x < L; ++x)
            for (int k = 0; k < N; ++k) xi(x, k) = nd(rng[static_cast<size_t>(r)]);
        return Config(Lc * xi);
    };

    struct State {
        Config u, g;
        double logp;
    };
    auto eval = [&](const Config& u) {
        State s{u, Config(), 0.0};
        Config gh;
        const double e = energy_grad(u, env, p, &gh);
        s.logp = -p.beta * e;
        s.g = -p.beta * gh;
        return s;
    };
    std::vector<State> st;
    for (int r = 0; r < n_replicas; ++r) {
        st.push_back(eval(noise(r)));
        if (!std::isfinite(st.back().logp))
            throw std::runtime_error("run_chains: energy of the initial configuration is not finite (replica " +
                                     std::to_string(r) + ")");
    }

    double h = step_size;
    const int burn = n_steps / 5;
    ChainStats out;
    out.L = L;
    out.N = N;
    out.n_replicas = n_replicas;
    out.radius_site.assign(static_cast<size_t>(L), {});
    out.msd.assign(static_cast<size_t>(L / 2 + 1), {});
    long acc_window = 0, tried_window = 0, acc_total = 0, tried_total = 0;

    for (int step = 0; step < n_steps; ++step) {
        for (int r = 0; r < n_replicas; ++r) {
            State& s = st[static_cast<size_t>(r)];
            const Config mean = s.u + 0.5 * h * (C * s.g);
            const Config prop = mean + std::sqrt(h) * noise(r);
            const State sn = eval(prop);
            if (!std::isfinite(s.logp)) {
                std::ostringstream os;
                os << "run_chains: energy diverged at step " << step << " replica " << r << " (step size " << h << ")";
                throw std::runtime_error(os.str());
            }
            const Config back = sn.u + 0.5 * h * (C * sn.g);
            const Config d1 = prop - mean, d0 = s.u - back;
            const double lq_fwd = -(d1.transpose() * P * d1).trace() / (2.0 * h);
            const double lq_bwd = -(d0.transpose() * P * d0).trace() / (2.0 * h);
            const double la = sn.logp - s.logp + lq_bwd - lq_fwd;
            ++tried_window;
            ++tried_total;
            if (std::isfinite(la) && std::log(ud(rng[static_cast<size_t>(r)])) < la) {
                s = sn;
                ++acc_window;
                ++acc_total;
            }
        }
        if (step < burn) {
            if ((step + 1) % 50 == 0) {
                const double rate = static_cast<double>(acc_window) / tried_window;
                if (rate > 0.7) h *= 1.25;
                else if (rate < 0.4) h /= 1.25;
                acc_window = tried_window = 0;
            }
            if (step + 1 == burn) acc_total = tried_total = 0;
            continue;
        }
        double rad = 0;
        for (int x = 0; x < L; ++x) {
            double rs = 0;
            for (const auto& s : st) rs += s.u.row(x).squaredNorm() / N;
            out.radius_site[static_cast<size_t>(x)].push_back(rs / n_replicas);
            rad += rs;
        }
        out.radius.push_back(rad / (L * n_replicas));
        if (n_replicas >= 2) {
            double ov = 0;
            for (int x = 0; x < L; ++x) {
                const double o = st[0].u.row(x).dot(st[1].u.row(x)) / N;
                out.overlap_samples.push_back(o);
                ov += o;
            }
            out.overlap.push_back(ov / L);
        }
        for (int j = 0; j <= L / 2; ++j) {
            double m = 0;
            for (const auto& s : st)
                for (int x = 0; x < L; ++x) m += (s.u.row((x + j) % L) - s.u.row(x)).squaredNorm() / N;
            out.msd[static_cast<size_t>(j)].push_back(m / (L * n_replicas));
        }
    }
    out.step_size = h;
    out.acceptance = tried_total ? static_cast<double>(acc_total) / tried_total : 0.0;
    return out;
}

Estimate batch_means(const std::vector<double>& series, int n_batches) {
    Estimate e;
    const size_t n = series.size();
    if (n == 0) return e;
    const size_t b = n / static_cast<size_t>(n_batches);
    if (b == 0) {
        double s = 0;
        for (double v : series) s += v;
        e.mean = s / n;
        return e;
    }
    std::vector<double> bm(static_cast<size_t>(n_batches), 0.0);
    for (int i = 0; i < n_batches; ++i) {
        for (size_t k = 0; k < b; ++k) bm[static_cast<size_t>(i)] += series[static_cast<size_t>(i) * b + k];
        bm[static_cast<size_t>(i)] /= static_cast<double>(b);
    }
    double m = 0;
    for (double v : bm) m += v;
    m /= n_batches;
    double var = 0;
    for (double v : bm) var += (v - m) * (v - m);
    var /= (n_batches - 1);
    e.mean = m;
    e.stderr_ = std::sqrt(var / n_batches);
    return e;
}

Estimate estimate_msd(const ChainStats& s, long x, long y) {
    long j = ((x - y) % s.L + s.L) % s.L;
    j = std::min(j, s.L - j);
    if (j == 0) return {};
    return batch_means(s.msd[static_cast<size_t>(j)]);
}

Histogram make_histogram(const std::vector<double>& samples, int bins) {
    Histogram h;
    if (samples.empty() || bins < 1) return h;
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    h.lo = *mn;
    h.hi = *mx > *mn ? *mx : *mn + 1.0;
    h.counts.assign(static_cast<size_t>(bins), 0.0);
    for (double v : samples) {
        int i = static_cast<int>((v - h.lo) / (h.hi - h.lo) * bins);
        h.counts[static_cast<size_t>(std::clamp(i, 0, bins - 1))] += 1.0;
    }
    return h;
}

double Histogram::mode() const {
    if (counts.empty()) return 0.0;
    const size_t i = static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    return lo + (hi - lo) * (i + 0.5) / counts.size();
}

bool Histogram::unimodal() const {
    if (counts.empty()) return false;
    const size_t im = static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    auto tol = [&](size_t i, size_t j) { return 3.0 * std::sqrt(counts[i] + counts[j] + 1.0); };
    auto check_side = [&](long from, long to, long dir) {
        double low = counts[static_cast<size_t>(from)];
        size_t ilow = static_cast<size_t>(from);
        for (long i = from + dir; i != to + dir; i += dir) {
            const size_t u = static_cast<size_t>(i);
            if (counts[u] > low + tol(u, ilow)) return false;
            if (counts[u] < low) {
                low = counts[u];
                ilow = u;
            }
        }
        return true;
    };
    const long n = static_cast<long>(counts.size());
    return check_side(static_cast<long>(im), 0, -1) && check_side(static_cast<long>(im), n - 1, 1);
}

SimSummary simulate(const ModelParams& p, const Correlator& c, const SimConfig& cfg) {
    SimSummary out;
    out.runs.resize(static_cast<size_t>(cfg.n_disorder));
    parallel_for(static_cast<size_t>(cfg.n_disorder), cfg.threads, [&](size_t d) {
        const auto env = sample_environment(c, cfg.N, cfg.L, cfg.M, cfg.seed + 0x9e3779b97f4a7c15ULL * (d + 1));
        out.runs[d] = run_chains(p, env, cfg.replicas, cfg.steps, cfg.step_size, cfg.seed, d);
    });
    auto combine = [&](auto get) {
        std::vector<Estimate> es;
        for (const auto& r : out.runs) es.push_back(get(r));
        Estimate e;
        const double n = static_cast<double>(es.size());
        double s2 = 0;
        for (const auto& x : es) {
            e.mean += x.mean / n;
            s2 += x.stderr_ * x.stderr_;
        }
        double within = std::sqrt(s2) / n, spread = 0;
        if (es.size() >= 2) {
            double v = 0;
            for (const auto& x : es) v += (x.mean - e.mean) * (x.mean - e.mean);
            spread = std::sqrt(v / (n - 1) / n);
        }
        e.stderr_ = std::max(within, spread);
        return e;
    };
    out.radius = combine([](const ChainStats& s) { return batch_means(s.radius); });
    if (cfg.replicas >= 2) out.overlap = combine([](const ChainStats& s) { return batch_means(s.overlap); });
    for (int j = 0; j <= cfg.L / 2; ++j)
        out.msd.push_back(combine([j](const ChainStats& s) { return batch_means(s.msd[static_cast<size_t>(j)]); }));
    for (int x = 0; x < cfg.L; ++x)
        out.radius_site.push_back(
            combine([x](const ChainStats& s) { return batch_means(s.radius_site[static_cast<size_t>(x)]); }));
    std::vector<double> all;
    double acc = 0;
    for (const auto& r : out.runs) {
        all.insert(all.end(), r.overlap_samples.begin(), r.overlap_samples.end());
        acc += r.acceptance / cfg.n_disorder;
    }
    out.overlap_hist = make_histogram(all, 50);
    out.acceptance = acc;
    return out;
}

}  // namespace epoly
