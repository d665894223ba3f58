#include "cli.hpp"

#include "epoly/correlator.hpp"
#include "epoly/displacement.hpp"
#include "epoly/kernels.hpp"
#include "epoly/parallel.hpp"
#include "epoly/parisi.hpp"
#include "epoly/phase.hpp"
#include "epoly/quad.hpp"
#include "epoly/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace epoly::cli {

using nlohmann::json;

namespace {

const std::vector<std::pair<std::string, std::string>> kDefaults = {
    {"correlator.kind", "exponential"},
    {"correlator.g", "1"},
    {"correlator.a", "1"},
    {"correlator.gamma", "2"},
    {"correlator.c0", "0"},
    {"correlator.lambda", ""},
    {"correlator.weight", ""},
    {"params.beta", "1"},
    {"params.mu", "1"},
    {"params.mu_over_larkin", ""},
    {"params.t", "1"},
    {"params.L", ""},
    {"grid.beta", "0.1:10:41"},
    {"grid.x", "1,2,5,10"},
    {"grid.x_massless", "1:1e6:19"},
    {"grid.L", "100,10000,1000000"},
    {"sim.N", "16"},
    {"sim.L", "4"},
    {"sim.M", "4096"},
    {"sim.steps", "20000"},
    {"sim.replicas", "2"},
    {"sim.disorder", "1"},
    {"sim.step_size", "0.5"},
    {"sim.bins", "50"},
    {"tol.n_grid", "2000"},
    {"tol.mu_min", "1e-16"},
    {"tol.mu_max", "1e8"},
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw ValidationError("config key " + key + ": not a number: '" + v + "'");
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    for (const auto& [k, v] : kDefaults) c.values[k] = v;
    return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!values.count(key)) throw ValidationError("unknown config key: " + key);
    values[key] = value;
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(n) + ": expected key=value");
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

bool RunConfig::has(const std::string& key) const { return !str(key).empty(); }

std::string RunConfig::str(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ValidationError("unknown config key: " + key);
    return it->second;
}

double RunConfig::num(const std::string& key) const { return parse_double(key, str(key)); }

long RunConfig::integer(const std::string& key) const {
    const double d = num(key);
    if (d != std::floor(d)) throw ValidationError("config key " + key + ": not an integer");
    return static_cast<long>(d);
}

// "a,b,c" or "lo:hi:n" (geometric)
std::vector<double> RunConfig::grid(const std::string& key) const {
    const std::string s = str(key);
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ValidationError("config key " + key + ": range must be lo:hi:n");
        const double lo = parse_double(key, parts[0]), hi = parse_double(key, parts[1]);
        const long n = static_cast<long>(parse_double(key, parts[2]));
        if (!(lo > 0) || !(hi > lo) || n < 2) throw ValidationError("config key " + key + ": need 0 < lo < hi, n >= 2");
        for (long i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
        out.back() = hi;
        return out;
    }
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ',');)
        if (!trim(p).empty()) out.push_back(parse_double(key, trim(p)));
    return out;
}

namespace {

struct Context {
    RunConfig cfg;
    std::filesystem::path out_dir;
    std::uint64_t seed = 1;
    int threads = 1;
    bool timestamp = true;
    std::ostream* out = nullptr;
};

std::string now_iso() {
    const std::time_t t = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_json(const Context& ctx, const std::string& name, json j) {
    if (ctx.timestamp) j["timestamp"] = now_iso();
    std::ofstream f(ctx.out_dir / name);
    f << j.dump(2) << "\n";
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }
    void write(const Context& ctx, const std::string& name) const {
        std::ofstream f(ctx.out_dir / name);
        if (ctx.timestamp) f << "# generated " << now_iso() << "\n";
        auto line = [&](const std::vector<std::string>& r) {
            for (size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
            f << "\n";
        };
        line(header_);
        for (const auto& r : rows_) line(r);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

Correlator make_correlator(const RunConfig& c) {
    const std::string kind = c.str("correlator.kind");
    if (kind == "exponential") return Correlator::exponential(c.num("correlator.g"), c.num("correlator.a"));
    if (kind == "power_law")
        return Correlator::power_law(c.num("correlator.g"), c.num("correlator.a"), c.num("correlator.gamma"));
    if (kind == "zero") return Correlator::zero();
    if (kind == "mixture") {
        const auto lam = c.grid("correlator.lambda"), w = c.grid("correlator.weight");
        if (lam.size() != w.size()) throw ValidationError("correlator.lambda and correlator.weight differ in length");
        std::vector<MixtureAtom> atoms;
        for (size_t i = 0; i < lam.size(); ++i) atoms.push_back({lam[i], w[i]});
        return Correlator::mixture(c.num("correlator.c0"), atoms);
    }
    throw ValidationError("correlator.kind must be exponential, power_law, mixture or zero, got '" + kind + "'");
}

ModelParams make_params(const RunConfig& c, const Correlator& corr) {
    ModelParams p{c.num("params.beta"), c.num("params.mu"), c.num("params.t"), std::nullopt};
    if (c.has("params.mu_over_larkin")) {
        const auto ml = larkin_mass(p.beta, p.t, corr);
        if (!ml) throw ValidationError("params.mu_over_larkin: no Larkin mass for " + corr.describe());
        p.mu = c.num("params.mu_over_larkin") * *ml;
    }
    if (c.has("params.L")) p.lattice_size = c.integer("params.L");
    p.validate();
    return p;
}

json params_json(const ModelParams& p, const Correlator& c) {
    json j{{"beta", p.beta}, {"mu", p.mu}, {"t", p.t}, {"correlator", c.describe()}};
    if (p.lattice_size) j["L"] = *p.lattice_size;
    return j;
}

RsbSolution solve_for(const Context& ctx, const ModelParams& p, const Correlator& c) {
    if (p.lattice_size) {
        const auto k = ResolventKernel::lattice(*p.lattice_size, p.t);
        if (!is_rs(p, c)) throw ValidationError("lattice solve supports RS points only (continuum RS condition fails)");
        return solve_rs_kernel(k, p, c, static_cast<int>(ctx.cfg.integer("tol.n_grid")));
    }
    return solve(p, c);
}

ResolventKernel kernel_for(const ModelParams& p) {
    return p.lattice_size ? ResolventKernel::lattice(*p.lattice_size, p.t) : ResolventKernel::continuum(p.t);
}

int cmd_classify(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    const auto p = make_params(ctx.cfg, c);
    const Phase ph = classify(p, c);
    const auto ml = larkin_mass(p.beta, p.t, c);
    json j{{"command", "classify"}, {"params", params_json(p, c)}, {"phase", to_string(ph)}, {"is_rs", is_rs(p, c)},
           {"ub_shape", to_string(ub_shape(c, p.t))}};
    j["larkin_mass"] = ml ? json(*ml) : json(nullptr);
    write_json(ctx, "classify.json", j);
    *ctx.out << "classify: phase=" << to_string(ph) << "\n";
    return 0;
}

int cmd_solve(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    const auto p = make_params(ctx.cfg, c);
    const auto sol = solve_for(ctx, p, c);
    json j = sol.to_json();
    j["command"] = "solve";
    j["params"] = params_json(p, c);
    write_json(ctx, "solve.json", j);
    Csv f({"s", "f"});
    for (const auto& [s, v] : sol.residuals.f_values) f.row({num(s), num(v)});
    f.write(ctx, "solve_f.csv");
    *ctx.out << "solve: phase=" << to_string(sol.phase) << " q_c=" << num(sol.q_c) << " q_*=" << num(sol.q_star())
             << " max_residual=" << num(sol.residuals.max_abs()) << "\n";
    return 0;
}

int cmd_free_energy(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    const auto p = make_params(ctx.cfg, c);
    const auto sol = solve_for(ctx, p, c);
    const double v = eval_functional(kernel_for(p), p, c, sol.q_c, sol.measure);
    json j{{"command", "free-energy"}, {"params", params_json(p, c)}, {"phase", to_string(sol.phase)},
           {"value", v},          {"q_c", sol.q_c},             {"residuals", sol.residuals.to_json()}};
    if (!p.lattice_size) j["parisi_functional_definition"] = eval_functional_definition(p, c, sol.q_c, sol.measure);
    if (sol.phase == Phase::RS) j["rs_free_energy"] = rs_free_energy(p, c);
    write_json(ctx, "free_energy.json", j);
    *ctx.out << "free-energy: P=" << num(v) << " phase=" << to_string(sol.phase) << "\n";
    return 0;
}

int cmd_phase_diagram(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    const double t = ctx.cfg.num("params.t");
    const auto betas = ctx.cfg.grid("grid.beta");
    const auto curve =
        phase_boundary(t, c, betas, ctx.cfg.num("tol.mu_min"), ctx.cfg.num("tol.mu_max"), ctx.threads);
    Csv f({"beta", "mu_boundary", "phase_left", "phase_right", "n_flips"});
    json pts = json::array();
    for (const auto& b : curve.points) {
        f.row({num(b.beta), num(b.mu_boundary), to_string(b.phase_left), to_string(b.phase_right),
               std::to_string(b.all_flips.size())});
        pts.push_back({{"beta", b.beta},
                       {"mu_boundary", b.mu_boundary},
                       {"phase_left", to_string(b.phase_left)},
                       {"phase_right", to_string(b.phase_right)},
                       {"all_flips", b.all_flips}});
    }
    f.write(ctx, "phase_diagram.csv");
    {
        std::ofstream d(ctx.out_dir / "phase_diagram.dat");
        d << "# beta mu_boundary\n";
        for (const auto& b : curve.points) d << num(b.beta) << " " << num(b.mu_boundary) << "\n";
        if (curve.massless_intercept) d << "\n# massless intercept\n" << num(*curve.massless_intercept) << " 0\n";
    }
    json j{{"command", "phase-diagram"}, {"t", t}, {"correlator", c.describe()}, {"points", pts}};
    j["massless_intercept"] = curve.massless_intercept ? json(*curve.massless_intercept) : json(nullptr);
    write_json(ctx, "phase_diagram.json", j);
    *ctx.out << "phase-diagram: " << curve.points.size() << " boundary points, massless intercept="
             << (curve.massless_intercept ? num(*curve.massless_intercept) : std::string("none")) << "\n";
    return 0;
}

int cmd_displacement(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    auto p = make_params(ctx.cfg, c);
    const auto lattice = p.lattice_size;
    p.lattice_size.reset();
    const auto sol = solve(p, c);
    std::optional<RsbSolution> sol_l;
    ModelParams pl = p;
    if (lattice) {
        pl.lattice_size = lattice;
        sol_l = solve_for(ctx, pl, c);
    }
    Csv f({"x", "h_continuum", "h_closed_form", "h_discrete"});
    for (double x : ctx.cfg.grid("grid.x")) {
        std::string closed;
        if (sol.phase == Phase::RS) closed = num(h_rs(p, c, x));
        else if (sol.phase == Phase::ONE_RSB) closed = num(h_1rsb(p, sol, x));
        f.row({num(x), num(h_continuum(p, sol, x)), closed, sol_l ? num(h_discrete(*lattice, pl, *sol_l, x)) : ""});
    }
    f.write(ctx, "displacement.csv");
    *ctx.out << "displacement: phase=" << to_string(sol.phase) << " written displacement.csv\n";
    return 0;
}

int cmd_wandering(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    const double t = ctx.cfg.num("params.t"), beta = ctx.cfg.num("params.beta");
    const auto w = wandering_exponent(c, t, beta);
    json j{{"command", "wandering"}, {"correlator", c.describe()}, {"t", t}, {"beta", beta}, {"eta", w.eta},
           {"regime", w.regime}};
    j["prefactor"] = w.prefactor ? json(*w.prefactor) : json(nullptr);
    if (w.prefactor) {
        const auto xs = ctx.cfg.grid("grid.x_massless");
        Csv f({"x", "h_massless", "h_over_x_2eta"});
        for (double x : xs) {
            const double h = h_frsb_massless(beta, t, c.gamma(), x, 0.0);
            f.row({num(x), num(h), num(h / std::pow(x, 2.0 * w.eta))});
        }
        f.write(ctx, "wandering.csv");
        if (xs.size() >= 2) j["loglog_slope"] = frsb_loglog_slope(beta, t, c.gamma(), xs[xs.size() - 2], xs.back());
    }
    write_json(ctx, "wandering.json", j);
    *ctx.out << "wandering: eta=" << num(w.eta) << " regime=" << w.regime << "\n";
    return 0;
}

// Continuum values as printed, next to the limits the lattice sums actually
// approach (the resolvent sum tends to half the printed R1).
int cmd_lattice_verify(Context& ctx) {
    const double mu = ctx.cfg.num("params.mu"), t = ctx.cfg.num("params.t");
    if (!(mu > 0) || !(t > 0)) throw ValidationError("lattice-verify: need mu, t > 0");
    const auto cont = ResolventKernel::continuum(t);
    const double y = cont.r1(mu), w = 1.0 / cont.k_prime(y) * -1.0;
    Csv f({"L", "quantity", "lattice_value", "continuum_value", "abs_error", "bound_envelope", "corrected_limit"});
    for (double Ld : ctx.cfg.grid("grid.L")) {
        const long L = static_cast<long>(Ld);
        const auto k = ResolventKernel::lattice(L, t);
        const double q = std::pow(Ld, 0.25);
        const double env = (1.0 / (q * mu) + 1.0 / std::sqrt(t) + 1.0 / (q * std::sqrt(mu * t))) / q;
        auto row = [&](const std::string& name, double lat, double con, double corrected, double envelope) {
            f.row({std::to_string(L), name, num(lat), num(con), num(std::abs(lat - con)),
                   std::isnan(envelope) ? "" : num(envelope), num(corrected)});
        };
        const double nan = std::nan("");
        row("r1", k.r1(mu), y, 0.5 * y, env);
        row("k", k.k(y), mu, 0.25 * mu, nan);
        row("kprime", k.k_prime(y), cont.k_prime(y), 0.25 * cont.k_prime(y), nan);
        row("u_inv", k.u_inv(w), cont.u_inv(w), cont.u_inv(w) / std::cbrt(4.0), nan);
        row("green_x1", k.green(mu, 1.0, 0), cont.green(mu, 1.0, 0), cont.green(mu, 1.0, 0), nan);
        const double ld = logdet(L, t, mu) / std::sqrt(Ld);
        const double as = logdet_asymptotic(L, t, mu) / std::sqrt(Ld);
        row("logdet_normalized", ld, as, as - std::sqrt(mu / t), 1.0 / q);
        if (L <= 1 << 20) row("pseudo_det_over_L2", std::exp(log_pseudo_det(L) - 2.0 * std::log(Ld)), 1.0, 1.0, nan);
    }
    f.write(ctx, "lattice_verify.csv");
    *ctx.out << "lattice-verify: written lattice_verify.csv\n";
    return 0;
}

int cmd_simulate(Context& ctx) {
    const auto c = make_correlator(ctx.cfg);
    auto p = make_params(ctx.cfg, c);
    SimConfig sc;
    sc.N = static_cast<int>(ctx.cfg.integer("sim.N"));
    sc.L = static_cast<int>(ctx.cfg.integer("sim.L"));
    sc.M = static_cast<int>(ctx.cfg.integer("sim.M"));
    sc.steps = static_cast<int>(ctx.cfg.integer("sim.steps"));
    sc.replicas = static_cast<int>(ctx.cfg.integer("sim.replicas"));
    sc.n_disorder = static_cast<int>(ctx.cfg.integer("sim.disorder"));
    sc.step_size = ctx.cfg.num("sim.step_size");
    sc.seed = ctx.seed;
    sc.threads = ctx.threads;
    p.lattice_size = sc.L;
    const auto s = simulate(p, c, sc);
    auto est = [](const Estimate& e) { return json{{"mean", e.mean}, {"stderr", e.stderr_}}; };
    json j{{"command", "simulate"}, {"params", params_json(p, c)}, {"seed", sc.seed}, {"N", sc.N}, {"M", sc.M},
           {"steps", sc.steps}, {"disorder", sc.n_disorder}, {"radius", est(s.radius)}, {"acceptance", s.acceptance},
           {"overlap_mode", s.overlap_hist.mode()}, {"overlap_unimodal", s.overlap_hist.unimodal()}};
    if (sc.replicas >= 2) j["overlap"] = est(s.overlap);
    json msd = json::array();
    for (const auto& e : s.msd) msd.push_back(est(e));
    j["msd"] = msd;
    write_json(ctx, "simulate.json", j);
    Csv h({"bin_lo", "bin_hi", "count"});
    const auto& hist = s.overlap_hist;
    const size_t nb = hist.counts.size();
    for (size_t i = 0; i < nb; ++i)
        h.row({num(hist.lo + (hist.hi - hist.lo) * i / nb), num(hist.lo + (hist.hi - hist.lo) * (i + 1) / nb),
               num(hist.counts[i])});
    h.write(ctx, "overlap_histogram.csv");
    *ctx.out << "simulate: radius=" << num(s.radius.mean) << " +- " << num(s.radius.stderr_) << "\n";
    return 0;
}

int cmd_errata_check(Context& ctx) {
    json j{{"command", "errata-check"}};
    // FRSB q_0: stationarity form against the printed equation
    {
        const auto c = Correlator::power_law(1.0, 1.0, 0.5);
        const double beta = 2.0, t = 1.0;
        const double ml = *larkin_mass(beta, t, c);
        ModelParams p{beta, ml / 10.0, t, std::nullopt};
        const auto sol = solve_frsb(p, c);
        json q;
        for (const auto& k : {"q0", "q0_stationarity", "q0_printed_equation", "F_q0_printed_equation"})
            if (sol.extras.count(k)) q[k] = sol.extras.at(k);
        q["F_q0_stationarity"] = sol.residuals.extra.at("F_q0_stationarity");
        q["beta"] = beta;
        q["mu"] = p.mu;
        q["gamma"] = 0.5;
        j["frsb_q0_variants"] = q;
    }
    // small-mass limit of G_{x,t}(mu) at t != 1
    {
        json g = json::array();
        for (double t : {0.5, 2.0})
            for (double x : {1.0, 3.0}) {
                const double v = green_continuum(1e-14, x, t, 0);
                g.push_back({{"t", t},
                             {"x", x},
                             {"G_at_mu_1e-14", v},
                             {"candidate_minus_x_over_2t", -x / (2.0 * t)},
                             {"candidate_minus_x_over_2", -x / 2.0}});
            }
        j["green_small_mu"] = g;
    }
    write_json(ctx, "errata_check.json", j);
    *ctx.out << "errata-check: written errata_check.json\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parisi-formula toolkit for the elastic polymer"};
    std::string command, config_path, out_dir = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    int threads = default_threads();
    bool no_timestamp = false;
    app.add_option("command", command, "subcommand")
        ->required()
        ->check(CLI::IsMember({"classify", "solve", "free-energy", "phase-diagram", "displacement", "wandering",
                               "lattice-verify", "simulate", "errata-check"}));
    app.add_option("overrides", overrides, "key=value config overrides");
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
    app.add_flag("--no-timestamp", no_timestamp, "omit timestamp lines");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    Context ctx;
    ctx.out = &out;
    ctx.seed = seed;
    ctx.threads = threads;
    ctx.timestamp = !no_timestamp;
    try {
        ctx.cfg = RunConfig::defaults();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ValidationError("cannot read config file " + config_path);
            std::stringstream ss;
            ss << f.rdbuf();
            ctx.cfg.merge_text(ss.str(), config_path);
        }
        for (const auto& o : overrides) ctx.cfg.merge_text(o, "command line");
        ctx.out_dir = out_dir;
        std::filesystem::create_directories(ctx.out_dir);

        if (command == "classify") return cmd_classify(ctx);
        if (command == "solve") return cmd_solve(ctx);
        if (command == "free-energy") return cmd_free_energy(ctx);
        if (command == "phase-diagram") return cmd_phase_diagram(ctx);
        if (command == "displacement") return cmd_displacement(ctx);
        if (command == "wandering") return cmd_wandering(ctx);
        if (command == "lattice-verify") return cmd_lattice_verify(ctx);
        if (command == "simulate") return cmd_simulate(ctx);
        if (command == "errata-check") return cmd_errata_check(ctx);
    } catch (const NonConvergence& e) {
        err << "nonconvergence: " << e.what() << " (best residual " << e.best_residual << ")\n";
        return 3;
    } catch (const QuadratureError& e) {
        err << "nonconvergence: " << e.what() << "\n";
        return 3;
    } catch (const InternalError& e) {
        err << "nonconvergence: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace epoly::cli
