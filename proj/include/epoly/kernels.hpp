#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace epoly {

struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigenvalues of the lattice Laplacian, -4L sin^2(k pi / L), k = 0..L-1.
std::vector<double> laplacian_eigenvalues(long L);

// Folded spectrum of -Delta_L: eigenvalue 4L sin^2(k pi/L) for k = 0..L/2 with
// multiplicity 1 for k = 0 and k = L/2 (L even), 2 otherwise.
struct FoldedSpectrum {
    long L = 1;
    std::vector<double> lam;
    std::vector<double> mult;
    std::vector<long> k;
};
std::shared_ptr<const FoldedSpectrum> folded_spectrum(long L);

// Symmetric circulant matrix on the lattice, given by its first row.
struct CirculantSymbol {
    std::vector<double> first_row;

    static CirculantSymbol identity(long L);
    // Translation-averaged displacement matrix: u -> ||u(z+j) - u(z)||^2 summed over z.
    static CirculantSymbol displacement(long L, long j);
    void validate() const;
    // Fourier symbol a_hat_k = sum_j a_j cos(2 pi j k / L), folded k = 0..L/2.
    std::vector<double> folded_symbol() const;
};

class ResolventKernel {
public:
    static ResolventKernel continuum(double t);
    static ResolventKernel lattice(long L, double t);

    bool is_lattice() const { return L_ > 0; }
    long L() const { return L_; }
    double t() const { return t_; }

    // L^{1/2} tr((mu - t Delta_L)^{-p}) with the normalized trace, p >= 1.
    double resolvent_sum(double mu, int p) const;
    double r1(double mu) const;
    double r2(double mu) const;
    double k(double x) const;
    double k_prime(double x) const;
    double u_inv(double y) const;
    // L^{-1/2}(log det(x - t Delta_L) - log det(y - t Delta_L)); continuum 2(sqrt x - sqrt y)/sqrt t.
    double logdet_diff(double x, double y) const;
    // Antiderivative of K up to a constant: A(y) = y K(y) - logdet_diff(K(y), ref).
    double k_antiderivative(double y, double ref) const;
    // G_{x,t}(mu) (order 0) or its mu-derivative (order 1).
    double green(double mu, double x, int order) const;
    // R_{p,A}(u) = L^{1/2} (1/L) sum_k a_hat_k / (u + t lambda_k)^p.
    double circulant_resolvent(const std::vector<double>& folded_symbol, double u, int p) const;

private:
    std::pair<double, double> r1_r2(double mu) const;
    std::pair<double, double> k_and_r2(double x) const;

    long L_ = 0;
    double t_ = 1.0;
    std::shared_ptr<const FoldedSpectrum> spec_;
};

// Lattice point [x]_L = floor(L^{1/2} x) mod L.
long lattice_index(long L, double x);

double logdet(long L, double t, double mu);
double logdet_asymptotic(long L, double t, double mu);
// det_+(-L^{-1} Delta_L); returned via exp of a sum of logs.
double pseudo_det(long L);
double log_pseudo_det(long L);

double heat_trace(long L, double time);
double heat_entry(long L, double time, double x);

// Continuum G_{x,t}(mu) = (exp(-|x| sqrt(mu/t)) - 1) / (2 sqrt(t mu)) and its mu-derivative.
double green_continuum(double mu, double x, double t, int order);

}  // namespace epoly
