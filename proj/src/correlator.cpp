#include "epoly/correlator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace epoly {

std::string to_string(UbShape s) {
    switch (s) {
        case UbShape::strictly_convex: return "strictly_convex";
        case UbShape::strictly_concave: return "strictly_concave";
        case UbShape::linear: return "linear";
        default: return "indeterminate";
    }
}

std::string to_string(CorrKind k) {
    switch (k) {
        case CorrKind::exponential: return "exponential";
        case CorrKind::power_law: return "power_law";
        default: return "mixture";
    }
}

Correlator Correlator::exponential(double g, double a) {
    if (!(g > 0) || !(a > 0)) throw std::invalid_argument("exponential correlator needs g > 0, a > 0");
    Correlator c;
    c.kind_ = CorrKind::exponential;
    c.g_ = g;
    c.a_ = a;
    return c;
}

Correlator Correlator::power_law(double g, double a, double gamma) {
    if (!(g > 0) || !(a > 0) || !(gamma > 0))
        throw std::invalid_argument("power_law correlator needs g, a, gamma > 0");
    Correlator c;
    c.kind_ = CorrKind::power_law;
    c.g_ = g;
    c.a_ = a;
    c.gamma_ = gamma;
    return c;
}

Correlator Correlator::mixture(double c0, std::vector<MixtureAtom> atoms) {
    if (!(c0 >= 0)) throw std::invalid_argument("mixture needs c0 >= 0");
    for (const auto& at : atoms)
        if (!(at.lambda > 0) || !(at.weight > 0))
            throw std::invalid_argument("mixture atoms need lambda > 0 and weight > 0");
    Correlator c;
    c.kind_ = CorrKind::mixture;
    c.c0_ = c0;
    c.atoms_ = std::move(atoms);
    return c;
}

double Correlator::eval(double x, int order) const {
    if (!(x >= 0)) throw std::domain_error("eval_b: x must be >= 0");
    if (order < 0 || order > 3) throw std::domain_error("eval_b: order must be in 0..3");
    switch (kind_) {
        case CorrKind::exponential: {
            double v = g_ * std::exp(-a_ * x);
            for (int k = 0; k < order; ++k) v *= -a_;
            return v;
        }
        case CorrKind::power_law: {
            // d^k/dx^k (a+x)^{-gamma} = (-1)^k gamma (gamma+1)...(gamma+k-1) (a+x)^{-gamma-k}
            double coef = g_;
            for (int k = 0; k < order; ++k) coef *= -(gamma_ + k);
            return coef * std::pow(a_ + x, -gamma_ - order);
        }
        default: {
            double v = order == 0 ? c0_ : 0.0;
            for (const auto& at : atoms_) {
                const double l2 = at.lambda * at.lambda;
                double term = at.weight * std::exp(-l2 * x);
                for (int k = 0; k < order; ++k) term *= -l2;
                v += term;
            }
            return v;
        }
    }
}

double eval_b(const Correlator& c, double x, int order) { return c.eval(x, order); }

std::pair<std::vector<double>, std::vector<double>> gauss_laguerre(int n, double alpha) {
    // Golub-Welsch on the Jacobi matrix of the generalized Laguerre polynomials.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = 2.0 * i + alpha + 1.0;
        if (i + 1 < n) {
            const double b = std::sqrt((i + 1.0) * (i + 1.0 + alpha));
            J(i, i + 1) = b;
            J(i + 1, i) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::tgamma(alpha + 1.0);
    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = mu0 * v0 * v0;
    }
    return {nodes, weights};
}

Correlator Correlator::to_mixture(int n_nodes) const {
    switch (kind_) {
        case CorrKind::exponential:
            return mixture(0.0, {{std::sqrt(a_), g_}});
        case CorrKind::power_law: {
            // (a+x)^{-gamma} = a^{-gamma}/Gamma(gamma) * int_0^inf e^{-s} s^{gamma-1} e^{-s x/a} ds
            auto [s, w] = gauss_laguerre(n_nodes, gamma_ - 1.0);
            const double pref = g_ * std::pow(a_, -gamma_) / std::tgamma(gamma_);
            std::vector<MixtureAtom> atoms;
            for (int i = 0; i < n_nodes; ++i) {
                if (!(w[i] > 0) || !(s[i] > 0)) continue;
                atoms.push_back({std::sqrt(s[i] / a_), pref * w[i]});
            }
            return mixture(0.0, std::move(atoms));
        }
        default:
            return *this;
    }
}

std::string Correlator::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case CorrKind::exponential: os << "exponential(g=" << g_ << ",a=" << a_ << ")"; break;
        case CorrKind::power_law:
            os << "power_law(g=" << g_ << ",a=" << a_ << ",gamma=" << gamma_ << ")";
            break;
        default: os << "mixture(c0=" << c0_ << ",atoms=" << atoms_.size() << ")";
    }
    return os.str();
}

double ub(const Correlator& c, double s, double t) {
    return std::cbrt(1.0 / (2.0 * c.b2(2.0 * s) * t));
}

double ub_prime(const Correlator& c, double s, double t) {
    // d/ds (2 t B''(2s))^{-1/3} = -(1/3)(2t)^{-1/3} B''^{-4/3} * 2 B'''
    const double b2 = c.b2(2.0 * s), b3 = c.b3(2.0 * s);
    return -(2.0 / 3.0) * std::cbrt(1.0 / (2.0 * t)) * b3 * std::pow(b2, -4.0 / 3.0);
}

namespace {
// Fourth derivative is only needed for the shape test of mixtures.
double b4_mixture(const Correlator& c, double x) {
    double v = 0;
    for (const auto& at : c.atoms()) {
        const double l2 = at.lambda * at.lambda;
        v += at.weight * l2 * l2 * std::exp(-l2 * x);
    }
    return v;
}

double b4(const Correlator& c, double x) {
    switch (c.kind()) {
        case CorrKind::exponential: return c.g() * std::pow(c.a(), 4) * std::exp(-c.a() * x);
        case CorrKind::power_law: {
            const double gm = c.gamma();
            return c.g() * gm * (gm + 1) * (gm + 2) * (gm + 3) * std::pow(c.a() + x, -gm - 4);
        }
        default: return b4_mixture(c, x);
    }
}
}  // namespace

double ub_second(const Correlator& c, double s, double t) {
    // U = k B''(2s)^{-1/3}; U'' = k * 4 * [ (4/9) B''^{-7/3} B'''^2 - (1/3) B''^{-4/3} B'''' ]
    const double x = 2.0 * s;
    const double b2 = c.b2(x), b3 = c.b3(x), bb4 = b4(c, x);
    const double k = std::cbrt(1.0 / (2.0 * t));
    return k * 4.0 * ((4.0 / 9.0) * std::pow(b2, -7.0 / 3.0) * b3 * b3 - (1.0 / 3.0) * std::pow(b2, -4.0 / 3.0) * bb4);
}

UbShape ub_shape(const Correlator& c, double t) {
    switch (c.kind()) {
        case CorrKind::exponential: return UbShape::strictly_convex;
        case CorrKind::power_law:
            if (c.gamma() > 1) return UbShape::strictly_convex;
            if (c.gamma() < 1) return UbShape::strictly_concave;
            return UbShape::linear;
        default: {
            if (c.atoms().empty()) return UbShape::indeterminate;
            int pos = 0, neg = 0;
            const int n = 400;
            for (int i = 0; i < n; ++i) {
                const double s = std::pow(10.0, -6.0 + 12.0 * i / (n - 1));
                const double v = ub_second(c, s, t);
                if (!std::isfinite(v)) continue;
                if (v > 0) ++pos;
                else if (v < 0) ++neg;
            }
            if (pos > 0 && neg == 0) return UbShape::strictly_convex;
            if (neg > 0 && pos == 0) return UbShape::strictly_concave;
            return UbShape::indeterminate;
        }
    }
}

bool massless_rsb_criterion(const Correlator& c) {
    switch (c.kind()) {
        case CorrKind::power_law: return c.gamma() < 1.0;
        // Every atom decays exponentially, so B''(x) x^3 -> 0.
        default: return false;
    }
}

Normalized normalize(const Correlator& c, double beta, double mu, double t) {
    double g = 1.0;
    switch (c.kind()) {
        case CorrKind::exponential:
        case CorrKind::power_law: g = c.g(); break;
        default: {
            g = c.b(0.0);
            if (!(g > 0)) g = 1.0;
        }
    }
    Correlator scaled = c;
    switch (c.kind()) {
        case CorrKind::exponential: scaled = Correlator::exponential(1.0, c.a()); break;
        case CorrKind::power_law: scaled = Correlator::power_law(1.0, c.a(), c.gamma()); break;
        default: {
            std::vector<MixtureAtom> at = c.atoms();
            for (auto& a : at) a.weight /= g;
            scaled = Correlator::mixture(c.c0() / g, at);
        }
    }
    return {scaled, beta * g, mu / g, t / g};
}

}  // namespace epoly
