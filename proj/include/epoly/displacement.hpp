#pragma once

#include "epoly/correlator.hpp"
#include "epoly/kernels.hpp"
#include "epoly/model.hpp"

#include <optional>
#include <string>

namespace epoly {

// -(2/beta) G(K(beta(q - q_*))) - 2 int_0^{q_*} G'(K(beta delta)) K'(beta delta) du for any kernel.
double h_kernel(const ResolventKernel& k, const ModelParams& p, double q, const ParisiMeasure& z, double x);

double h_continuum(const ModelParams& p, const RsbSolution& sol, double x);
double h_discrete(long L, const ModelParams& p, const RsbSolution& sol_L, double x);

// RS closed form: -(2/beta) G(mu) - 4 B'(2/(beta sqrt(mu t))) G'(mu).
double h_rs(const ModelParams& p, const Correlator& c, double x);
// 1RSB closed form from (q0, m, a = beta(q_c - q_*)).
double h_1rsb(const ModelParams& p, const RsbSolution& sol, double x);

// Power law B = (1+x)^{-gamma}, gamma < 1, with the mass entering only through
// the upper end of the u-integral; mu = 0 gives the massless limit.
double h_frsb_massless(double beta, double t, double gamma, double x, double mu);
// lim H(x) / x^{3/(gamma+2)} of the expression above.
double h_frsb_massless_prefactor(double t, double gamma);

// beta^{-1} R_{1,A}(K(beta(q - q_*))) - int_0^{q_*} R_{2,A}(K(beta delta)) K'(beta delta) du
double circulant_expectation(const ResolventKernel& k, const ModelParams& p, const RsbSolution& sol_L,
                             const CirculantSymbol& a);

struct Wandering {
    double eta;
    std::optional<double> prefactor;
    std::string regime;  // diffusive_rs, diffusive_rsb, superdiffusive_frsb
};
Wandering wandering_exponent(const Correlator& c, double t, double beta);

// log-log slope of h_frsb_massless between x1 and x2
double frsb_loglog_slope(double beta, double t, double gamma, double x1, double x2);

}  // namespace epoly
