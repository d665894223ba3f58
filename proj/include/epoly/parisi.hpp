#pragma once

#include "epoly/correlator.hpp"
#include "epoly/kernels.hpp"
#include "epoly/model.hpp"
#include "epoly/quad.hpp"

#include <functional>
#include <vector>

namespace epoly {

// The measure with its top piece moved so that it lives on [0, q); q > q_*.
ParisiMeasure with_radius(const ParisiMeasure& z, double q);

// phi(y) together with antiderivatives Phi' = phi and Psi' = Phi (Psi may be empty).
struct DeltaFamily {
    std::function<double(double)> phi, Phi, Psi;
};

// int_lo^hi w(u) phi(beta delta(u)) du with w = 1 (moment 0) or s_ref - u (moment 1).
// Constant CDF pieces are integrated exactly through the antiderivatives.
double delta_integral(const ParisiMeasure& z, double beta, const DeltaFamily& fam, double lo, double hi,
                      int moment = 0, double s_ref = 0.0);

// int_lo^hi zeta([0,u]) B'(2(q-u)) du
double cdf_b1_integral(const ParisiMeasure& z, const Correlator& c, double lo, double hi);

// Kernel form, valid for both flavors:
// (1/2)[ LD(mu, K(y*)) + y* K(y*) + beta int_0^{q*} K(beta delta) - 2 beta^2 int zeta B'(2(q-u)) du - beta mu q ]
// with y* = beta (q - q_*) and LD the normalized log-det difference.
double eval_functional(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q,
                       const ParisiMeasure& z);
// Continuum functional written with int du/(beta t delta^2) - 1/(beta t (q - q_*)) + 2 sqrt(mu/t).
double eval_functional_definition(const ModelParams& p, const Correlator& c, double q, const ParisiMeasure& z);

double big_f(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q, const ParisiMeasure& z,
             double s);
double little_f(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q, const ParisiMeasure& z,
                double s);

struct FProfile {
    std::vector<double> s, big, little;
};
// F and f on a sorted grid inside [0, q), swept cumulatively.
FProfile f_profile(const ResolventKernel& k, const ModelParams& p, const Correlator& c, double q,
                   const ParisiMeasure& z, std::vector<double> grid);

StationarityResiduals stationarity_residuals(const ResolventKernel& k, const ModelParams& p, const Correlator& c,
                                             double q, const ParisiMeasure& z, int n_grid = 2000);

double rs_free_energy(const ModelParams& p, const Correlator& c);

}  // namespace epoly
