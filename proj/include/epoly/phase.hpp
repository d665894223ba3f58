#pragma once

#include "epoly/correlator.hpp"
#include "epoly/kernels.hpp"
#include "epoly/model.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epoly {

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedCorrelator : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonConvergence : std::runtime_error {
    double best_residual;
    NonConvergence(const std::string& what, double r) : std::runtime_error(what), best_residual(r) {}
};

// g(s) = beta^2 B(2s/beta) - 1/(s t) - s (2 beta B'(2/(beta sqrt(mu t))) + mu)
double g_function(const ModelParams& p, const Correlator& c, double s);
// s_bar = 1/sqrt(mu t)
double s_bar(const ModelParams& p);

bool is_rs(const ModelParams& p, const Correlator& c);

// Largest root in mu of B''(2/(beta sqrt(mu t))) 2/sqrt(mu^3 t) = 1.
std::optional<double> larkin_mass(double beta, double t, const Correlator& c);

RsbSolution solve_rs(const ModelParams& p, const Correlator& c);
// RS pair for an arbitrary kernel: beta (q - q_*) = R1(mu), q_* = -2 B'(2(q - q_*)) R2(mu).
RsbSolution solve_rs_kernel(const ResolventKernel& k, const ModelParams& p, const Correlator& c, int n_grid = 2000);

// Reduced two-equation 1RSB system in (a, m), a = beta (q_c - q_*).  Returns the
// unscaled residuals and fills the Jacobian of the scaled system when asked.
struct OneRsbEval {
    double e1, e2;        // F(q_*) = 0 and int_{q0}^{q*} F = 0
    double r1, r2;        // e1 / eps, e2 / eps^2 with eps = s_bar - a
    std::array<double, 4> jac;  // d(r1, r2)/d(a, m), row-major
    double q0, q_star, q_c, delta;
};
OneRsbEval one_rsb_system(const ModelParams& p, const Correlator& c, double a, double m);

RsbSolution solve_1rsb(const ModelParams& p, const Correlator& c);
RsbSolution solve_frsb(const ModelParams& p, const Correlator& c);

Phase classify(const ModelParams& p, const Correlator& c);
RsbSolution solve(const ModelParams& p, const Correlator& c);

struct BoundaryPoint {
    double beta;
    double mu_boundary;
    Phase phase_left, phase_right;
    std::vector<double> all_flips;
};

struct PhaseBoundaryCurve {
    double t = 1.0;
    Correlator corr;
    std::vector<BoundaryPoint> points;
    std::optional<double> massless_intercept;
};

PhaseBoundaryCurve phase_boundary(double t, const Correlator& c, const std::vector<double>& beta_grid,
                                  double mu_min = 1e-16, double mu_max = 1e8, int threads = 1);

// Root in beta of sup_{s>0} [beta^2 B(2s/beta) - 1/(s t)] = 0, i.e.
// beta^3 t sup_w w B(w) = 2.  Absent when w B(w) is unbounded.
std::optional<double> massless_transition_beta(double t, const Correlator& c);

}  // namespace epoly
