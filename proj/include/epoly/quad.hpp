#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace epoly {

struct QuadratureError : std::runtime_error {
    double achieved;
    QuadratureError(const std::string& what, double err) : std::runtime_error(what), achieved(err) {}
};

// Adaptive Gauss-Kronrod on [a, b]; throws when the error estimate stays above tol.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-10, const char* what = "integral") {
    if (b <= a) return 0.0;
    double err = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-12, &err);
    if (!std::isfinite(v) || err > tol * std::max(1.0, std::abs(v))) {
        std::ostringstream os;
        os << what << ": quadrature error " << err << " above tolerance " << tol;
        throw QuadratureError(os.str(), err);
    }
    return v;
}

}  // namespace epoly
