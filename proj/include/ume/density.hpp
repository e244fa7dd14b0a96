#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ume/ensemble.hpp"
#include "ume/spectral.hpp"

namespace ume {

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on smooth integrands.
double integrate(const RealFn& f, double a, double b, double tol = 1e-12);
// Tanh-sinh, for integrable endpoint singularities.
double integrate_endpoint_singular(const RealFn& f, double a, double b, double tol = 1e-12);

// (2/pi) sqrt(1 - eps^2) on [-1, 1], zero outside.
double semicircle(double eps);

struct MeanDensityValue {
    double value = 0.0;
    // False where the closed form is not a finite density value: the 0/0 edge point at
    // N = 3 or a nonpositive denominator.
    bool valid = true;
};
// (2/pi) sqrt(1 - eps^2) / (1 + 1/(N-2) - 4 eps^2/(N-1)); zero outside [-1, 1].
MeanDensityValue ume_mean_density_checked(double eps, int N);
double ume_mean_density(double eps, int N);

// Exact finite-N GUE level density with <|H_ij|^2> = 1, normalized to one, on the raw
// energy axis (support about +-2 sqrt N).
double gue_finite_density_unscaled(double energy, int N);
// Same density on x = E / sqrt N, support about [-2, 2].
double gue_finite_density(double x, int N);

struct OscillationValue {
    std::complex<double> value;  // the complex 1/N correction term
    double real = 0.0;           // the density correction used downstream
    double envelope = 0.0;       // |value|
};
// Throws DomainError for |x| >= 2.  The arctan is evaluated with atan2, i.e. on (-pi, pi];
// for integer N the choice of branch does not change the value.
OscillationValue gue_density_oscillation(double x, int N);

// sum_{m <= nstar} T_m(x) T_m(xi) / (1 + (pi/2) sqrt(1 - xi^2)), |xi| < 1 - c/nstar.
double delta_kernel(double x, double xi, int nstar, double c = 5.0);
double delta_kernel_prefactor(double xi);
void check_delta_band(double xi, int nstar, double c);

struct ChebyshevCoefficients {
    int m_max = 0;
    std::vector<double> f;  // f_0..f_{m_max}
};
// Gauss-Chebyshev quadrature with nodes >= 4 m_max (default exactly that, at least 8).
ChebyshevCoefficients chebyshev_coefficients(const RealFn& f, int m_max, int nodes = 0);

// Monomial coefficients, ascending powers.
struct Polynomial {
    std::vector<double> c;
    double operator()(double x) const;
    int degree() const { return static_cast<int>(c.size()) - 1; }
};
Polynomial chebyshev_polynomial(int n);

struct TraceFormulaSides {
    double direct = 0.0;     // (1/N) Tr f(W) from the spectrum
    double per_term = 0.0;   // y_n expansion with the boundary terms written out
    double integral = 0.0;   // y_n expansion with the smooth part as an integral of the mean density
    double scale = 0.0;      // sum of the magnitudes of the per-term contributions
};
TraceFormulaSides trace_formula_sides(const HermitianMatrix& m, const Polynomial& f);
// |direct - per_term| / max(|direct|, |per_term|, scale).
double trace_formula_residual(const HermitianMatrix& m, const Polynomial& f);

struct DensityCurve {
    std::string axis;  // "eps" on [-1, 1] or "x" on [-2, 2]
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> se;  // empty for closed-form curves
    bool normalized = false;
};

struct DensityHistogram {
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t replicas = 0;
    std::uint64_t total = 0;
    std::vector<double> heights;  // counts / (total * width)
    double width() const { return edges.size() > 1 ? edges[1] - edges[0] : 0.0; }
};
// Bins of the given width anchored at `anchor`, covering every sample.
DensityHistogram make_histogram(std::span<const double> samples, double width, double anchor = -1.0,
                                std::uint64_t replicas = 0);
// Default width 2 / ceil(sqrt(replicas)).
double default_bin_width(std::uint64_t replicas);
// L1 distance between the histogram step function and f on [a, b].
double l1_distance(const DensityHistogram& h, const RealFn& f, double a, double b);

// Per-replica values (1/N) Tr delta_{nstar}(W; xi_j) for every grid point.
std::vector<double> smoothed_density_sample(const Spectrum& spec, std::span<const double> grid, int nstar,
                                            double c = 5.0);
// Monte Carlo mean over the supplied spectra with standard errors.
DensityCurve smoothed_mean_density(std::span<const Spectrum> spectra, std::span<const double> grid, int nstar,
                                   double c = 5.0);

}  // namespace ume
