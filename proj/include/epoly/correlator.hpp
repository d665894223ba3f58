#pragma once

#include <string>
#include <utility>
#include <vector>

namespace epoly {

enum class CorrKind { exponential, power_law, mixture };

enum class UbShape { strictly_convex, strictly_concave, linear, indeterminate };

std::string to_string(UbShape s);
std::string to_string(CorrKind k);

// One Gaussian atom of the Schoenberg form: weight * exp(-lambda^2 x).
struct MixtureAtom {
    double lambda;
    double weight;
};

class Correlator {
public:
    static Correlator exponential(double g, double a);
    static Correlator power_law(double g, double a, double gamma);
    static Correlator mixture(double c0, std::vector<MixtureAtom> atoms);
    // B identically zero.
    static Correlator zero() { return mixture(0.0, {}); }

    CorrKind kind() const { return kind_; }
    double g() const { return g_; }
    double a() const { return a_; }
    double gamma() const { return gamma_; }
    double c0() const { return c0_; }
    const std::vector<MixtureAtom>& atoms() const { return atoms_; }
    bool is_zero() const { return kind_ == CorrKind::mixture && c0_ == 0.0 && atoms_.empty(); }

    // order-th derivative of B at x >= 0, order in 0..3.
    double eval(double x, int order) const;
    double b(double x) const { return eval(x, 0); }
    double b1(double x) const { return eval(x, 1); }
    double b2(double x) const { return eval(x, 2); }
    double b3(double x) const { return eval(x, 3); }

    // Schoenberg mixture representation. Power laws use generalized
    // Gauss-Laguerre quadrature with n_nodes nodes.
    Correlator to_mixture(int n_nodes = 200) const;

    // Mixtures with c0 > 0 lie outside the assumptions of the theory.
    bool outside_assumptions() const { return kind_ == CorrKind::mixture && c0_ > 0.0; }

    std::string describe() const;

private:
    CorrKind kind_ = CorrKind::mixture;
    double g_ = 0, a_ = 0, gamma_ = 0, c0_ = 0;
    std::vector<MixtureAtom> atoms_;
};

double eval_b(const Correlator& c, double x, int order);

// U_B(s) = (2 B''(2s) t)^{-1/3} and its first two derivatives in s.
double ub(const Correlator& c, double s, double t);
double ub_prime(const Correlator& c, double s, double t);
double ub_second(const Correlator& c, double s, double t);

UbShape ub_shape(const Correlator& c, double t);

// limsup_{x->inf} B''(x) x^3 = infinity.
bool massless_rsb_criterion(const Correlator& c);

// Rescaling (mu, t, beta) -> (mu/g, t/g, beta g) and u -> a u.  Returned as
// explicit values; nothing in the library applies it implicitly.
struct Normalized {
    Correlator corr;
    double beta, mu, t;
};
Normalized normalize(const Correlator& c, double beta, double mu, double t);

// Nodes and weights of the n-point generalized Gauss-Laguerre rule for
// the weight s^alpha e^{-s} on (0, inf).
std::pair<std::vector<double>, std::vector<double>> gauss_laguerre(int n, double alpha);

}  // namespace epoly
