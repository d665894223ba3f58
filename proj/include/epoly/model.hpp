#pragma once

#include "epoly/correlator.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace epoly {

struct ModelParams {
    double beta = 1.0;
    double mu = 1.0;
    double t = 1.0;
    std::optional<long> lattice_size;

    void validate() const;
};

enum class SegKind { constant, frsb_power_law, frsb_general, sampled };

std::string to_string(SegKind k);

// A piece of the CDF s -> zeta([0,s]) on [a, b).  Closed-form pieces are
// evaluated at the argument s - shift, which is how translations are stored.
struct Segment {
    double a = 0, b = 0;
    SegKind kind = SegKind::constant;
    double value = 0;  // constant

    // frsb_power_law: cdf(s) = coef * (pa + 2 (qc - s'))^{(gamma-1)/3}
    // frsb_general:   cdf(s) = U_B'(qc - s') / beta
    double beta = 0, t = 0, qc = 0, shift = 0;
    double gamma = 0, coef = 0, pa = 1;
    std::shared_ptr<const Correlator> corr;

    std::vector<double> xs, ys;  // sampled, linear interpolation

    double cdf(double s) const;
    // int_lo^hi cdf(u) du for a <= lo <= hi <= b.
    double integral(double lo, double hi) const;
};

class ParisiMeasure {
public:
    ParisiMeasure() = default;
    // Segments must cover [0, q] contiguously; the last one must be constant 1.
    ParisiMeasure(double q, std::vector<Segment> segments);

    static ParisiMeasure dirac(double q, double q_star);
    static ParisiMeasure one_rsb(double q, double q0, double q_star, double m);
    // Atoms (location, mass) with masses summing to one, all locations < q.
    static ParisiMeasure from_atoms(double q, std::vector<std::pair<double, double>> atoms);
    // CDF given on a grid (right-continuous steps between grid points are
    // not representable here; values are linearly interpolated).
    static ParisiMeasure sampled(double q, std::vector<double> xs, std::vector<double> ys, double q_star);

    double q() const { return q_; }
    double q_star() const { return q_star_; }
    const std::vector<Segment>& segments() const { return segs_; }

    double cdf(double s) const;
    double delta(double s) const;
    ParisiMeasure translate(double r) const;

    // Jumps of the CDF, as (location, mass).
    std::vector<std::pair<double, double>> atoms() const;
    // Infimum of the support.
    double support_min() const;
    // Segment boundaries in [0, q].
    std::vector<double> breakpoints() const;
    // True when s lies in the closed support.
    bool in_support(double s, double tol = 1e-12) const;

    nlohmann::json to_json() const;

private:
    void build();
    int find(double s) const;

    double q_ = 0, q_star_ = 0;
    std::vector<Segment> segs_;
    std::vector<double> delta_at_b_;  // delta at the right end of each segment
};

double cdf(const ParisiMeasure& z, double s);
double delta(const ParisiMeasure& z, double s);
ParisiMeasure translate(const ParisiMeasure& z, double r);

// Sup-norm distance of two CDFs on an n-point uniform grid of [0, min(q1,q2)].
double cdf_distance(const ParisiMeasure& a, const ParisiMeasure& b, int n = 10000);

enum class Phase { RS, ONE_RSB, FRSB };
std::string to_string(Phase p);

struct StationarityResiduals {
    double larkin_residual = 0;
    double support_max_f_gap = 0;
    double offsupport_violation = 0;
    // sup over support of f minus sup over off-support grid points of f.
    double offsupport_margin = 0;
    std::vector<std::pair<double, double>> f_values;
    std::map<std::string, double> extra;  // equation-specific residuals

    double max_abs() const;
    nlohmann::json to_json(bool with_f = false) const;
};

struct RsbSolution {
    Phase phase = Phase::RS;
    double q_c = 0;
    ParisiMeasure measure;
    std::map<std::string, double> extras;
    double free_energy = 0;
    StationarityResiduals residuals;

    double q_star() const { return measure.q_star(); }
    nlohmann::json to_json() const;
};

}  // namespace epoly
