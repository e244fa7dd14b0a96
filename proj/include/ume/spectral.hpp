#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ume/ensemble.hpp"

namespace ume {

struct Spectrum {
    int dim = 0;
    std::vector<double> lambda;  // eigenvalues of the source matrix, ascending
    // Eigenvalues on the W axis.  UME: lambda / (2 sqrt(N-2)); GUE: lambda / (2 sqrt N);
    // SCALED: lambda itself.  Empty when N < 3 for UME input.
    std::vector<double> eps;
    double divisor = 1.0;
    bool ramanujan = false;  // all |eps_k| <= 1
    std::optional<CMatrix> vectors;  // columns match lambda order
};

// Throws ContractViolation when H deviates from Hermitian beyond 1e-12 relative.
Spectrum eigenvalues(const HermitianMatrix& h, bool want_vectors = false);

// Builds a spectrum straight from eps values on the W axis (N = eps.size()).
Spectrum spectrum_from_eps(std::vector<double> eps);

// (1/N) sum_j lambda_j^k.
double spectral_moment(const Spectrum& spec, int k);

double chebyshev_eval(int n, double x);
// T_0(x)..T_nmax(x).
std::vector<double> chebyshev_all(int nmax, double x);
// Derivatives T_n'(x) and T_n''(x) by the recurrences of T and its derivatives.
double chebyshev_derivative(int n, double x);
double chebyshev_second_derivative(int n, double x);

// Monomial coefficients d_r with T_n(x) = sum_r d_r x^{n-2r}, r = 0..floor(n/2).
std::vector<double> chebyshev_monomial_coefficients(int n);

double chebyshev_trace(const Spectrum& spec, int n);
double chebyshev_trace(const HermitianMatrix& w, int n);

// ((N-3)/2) (1 + (-1)^n) / (N-2)^{n/2}
double pretrace_boundary(int n, int N);
// (2/N) Tr T_n(W) + boundary, i.e. the normalized Hashimoto trace.
double y_n(const Spectrum& spec, int n);
// All of y_0..y_nmax in one pass.
std::vector<double> y_all(const Spectrum& spec, int nmax);
// Natural magnitude of the terms entering y_n; used as a floor for relative errors.
double y_n_scale(const Spectrum& spec, int n);

// F_n = Tr T_n(W) - mean, n >= 3.
double centered_chebyshev(const Spectrum& spec, int n, double mean);

std::uint64_t catalan(int k);
// m_k = <Tr H^{2k}> / N^{k+1} from the three-term recurrence with m_0 = m_1 = 1.
double gue_moment(int k, double N);
// Leading terms of <Tr T_{2n}(H / (2 sqrt N))> for the GUE.
double gue_chebyshev_formula(int n, double N);

}  // namespace ume
