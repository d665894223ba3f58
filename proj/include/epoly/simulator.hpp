#pragma once

#include "epoly/correlator.hpp"
#include "epoly/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace epoly {

// Random-feature potential, independent per site:
// V_x(u) = sum_{i,m} gain * cos(omega . u + phase), gain = g sqrt(N w_i 2/M).
struct EnvironmentRealization {
    int N = 0, L = 0, M = 0, n_atoms = 0;
    std::uint64_t seed = 0;
    std::vector<double> omega;  // [x][i][m][N]
    std::vector<double> phase;  // [x][i][m]
    std::vector<double> gain;   // [x][i][m]

    size_t features_per_site() const { return static_cast<size_t>(n_atoms) * M; }
    double potential(int x, const double* u) const;
    // grad += scale * dV_x/du
    double potential_and_gradient(int x, const double* u, double scale, double* grad) const;
};

EnvironmentRealization sample_environment(const Correlator& c, int N, int L, int M, std::uint64_t seed);

// u is L x N: row x holds u(x) in R^N.
using Config = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double hamiltonian(const Config& u, const EnvironmentRealization& env, const ModelParams& p);
Config gradient(const Config& u, const EnvironmentRealization& env, const ModelParams& p);

struct ChainStats {
    int L = 0, N = 0, n_replicas = 0;
    double step_size = 0, acceptance = 0;
    // post burn-in time series
    std::vector<double> radius;                // site- and replica-averaged ||u(x)||_N^2
    std::vector<std::vector<double>> radius_site;  // [x][step]
    std::vector<double> overlap;               // site-averaged (u(x), u'(x))_N, replicas 0 and 1
    std::vector<double> overlap_samples;       // every site, every step
    std::vector<std::vector<double>> msd;      // [j][step], j = 0..L/2
};

ChainStats run_chains(const ModelParams& p, const EnvironmentRealization& env, int n_replicas, int n_steps,
                      double step_size, std::uint64_t seed, std::uint64_t stream = 0);

struct Estimate {
    double mean = 0, stderr_ = 0;
};
// Batch means with n_batches batches.
Estimate batch_means(const std::vector<double>& series, int n_batches = 32);

Estimate estimate_msd(const ChainStats& s, long x, long y);

struct Histogram {
    double lo = 0, hi = 0;
    std::vector<double> counts;
    double mode() const;
    // monotone up to the mode and down after it, up to 3 sigma count noise
    bool unimodal() const;
};
Histogram make_histogram(const std::vector<double>& samples, int bins);

struct SimConfig {
    int N = 16, L = 4, M = 4096, steps = 20000, replicas = 2, n_disorder = 1;
    double step_size = 0.5;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct SimSummary {
    Estimate radius, overlap;
    std::vector<Estimate> msd;  // j = 0..L/2
    std::vector<Estimate> radius_site;
    Histogram overlap_hist;
    double acceptance = 0;
    std::vector<ChainStats> runs;
};

// Disorder-averaged statistics; per-draw means combined with their spread.
SimSummary simulate(const ModelParams& p, const Correlator& c, const SimConfig& cfg);

}  // namespace epoly
