#include "ume/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ume {

namespace {

void check_hermitian(const CMatrix& a) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * scale)
        throw ContractViolation("eigenvalues: matrix is not Hermitian (deviation " + std::to_string(dev) + ")");
}

void fill_eps(Spectrum& s) {
    s.eps.resize(s.lambda.size());
    bool inside = true;
    for (std::size_t k = 0; k < s.lambda.size(); ++k) {
        s.eps[k] = s.lambda[k] / s.divisor;
        inside = inside && std::abs(s.eps[k]) <= 1.0;
    }
    s.ramanujan = inside;
}

}  // namespace

Spectrum eigenvalues(const HermitianMatrix& h, bool want_vectors) {
    check_hermitian(h.entries);
    Spectrum s;
    s.dim = h.dim;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.entries, want_vectors ? Eigen::ComputeEigenvectors
                                                                      : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalues: solver did not converge");
    const auto& ev = es.eigenvalues();
    s.lambda.assign(ev.data(), ev.data() + ev.size());  // Eigen returns ascending order
    if (want_vectors) s.vectors = es.eigenvectors();

    switch (h.kind) {
        case MatrixKind::UME:
            if (h.dim < 3) {
                s.eps.clear();
                return s;
            }
            s.divisor = scale_divisor(h.dim);
            break;
        case MatrixKind::GUE:
            s.divisor = 2.0 * std::sqrt(static_cast<double>(h.dim));
            break;
        case MatrixKind::SCALED:
            s.divisor = 1.0;
            break;
    }
    fill_eps(s);
    return s;
}

Spectrum spectrum_from_eps(std::vector<double> eps) {
    Spectrum s;
    s.dim = static_cast<int>(eps.size());
    std::sort(eps.begin(), eps.end());
    s.lambda = eps;
    s.divisor = 1.0;
    fill_eps(s);
    return s;
}

double spectral_moment(const Spectrum& spec, int k) {
    double acc = 0.0;
    for (double l : spec.lambda) acc += std::pow(l, k);
    return acc / spec.dim;
}

double chebyshev_eval(int n, double x) {
    if (n == 0) return 1.0;
    double t0 = 1.0, t1 = x;
    for (int k = 1; k < n; ++k) {
        const double t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    return t1;
}

std::vector<double> chebyshev_all(int nmax, double x) {
    std::vector<double> t(static_cast<std::size_t>(nmax) + 1);
    t[0] = 1.0;
    if (nmax >= 1) t[1] = x;
    for (int k = 2; k <= nmax; ++k) t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    return t;
}

double chebyshev_derivative(int n, double x) {
    // Differentiate T_{k+1} = 2x T_k - T_{k-1}.
    if (n == 0) return 0.0;
    double t0 = 1.0, t1 = x, d0 = 0.0, d1 = 1.0;
    for (int k = 1; k < n; ++k) {
        const double t2 = 2.0 * x * t1 - t0;
        const double d2 = 2.0 * t1 + 2.0 * x * d1 - d0;
        t0 = t1, t1 = t2, d0 = d1, d1 = d2;
    }
    return d1;
}

double chebyshev_second_derivative(int n, double x) {
    if (n < 2) return 0.0;
    double t0 = 1.0, t1 = x, d0 = 0.0, d1 = 1.0, s0 = 0.0, s1 = 0.0;
    for (int k = 1; k < n; ++k) {
        const double t2 = 2.0 * x * t1 - t0;
        const double d2 = 2.0 * t1 + 2.0 * x * d1 - d0;
        const double s2 = 4.0 * d1 + 2.0 * x * s1 - s0;
        t0 = t1, t1 = t2, d0 = d1, d1 = d2, s0 = s1, s1 = s2;
    }
    return s1;
}

std::vector<double> chebyshev_monomial_coefficients(int n) {
    if (n == 0) return {1.0};
    std::vector<double> d(static_cast<std::size_t>(n / 2) + 1);
    for (int r = 0; r <= n / 2; ++r) {
        // (n/2) (-1)^r 2^{n-2r} (n-r-1)! / (r! (n-2r)!)
        const double lg = std::lgamma(n - r) - std::lgamma(r + 1) - std::lgamma(n - 2 * r + 1);
        const double mag = 0.5 * n * std::ldexp(std::exp(lg), n - 2 * r);
        d[r] = std::round((r % 2 ? -mag : mag));  // coefficients are integers
    }
    return d;
}

double chebyshev_trace(const Spectrum& spec, int n) {
    double acc = 0.0;
    for (double e : spec.eps) acc += chebyshev_eval(n, e);
    return acc;
}

double chebyshev_trace(const HermitianMatrix& w, int n) { return chebyshev_trace(eigenvalues(w), n); }

double pretrace_boundary(int n, int N) {
    if (n % 2) return 0.0;
    return (N - 3.0) * std::pow(N - 2.0, -0.5 * n);
}

double y_n(const Spectrum& spec, int n) {
    if (spec.dim < 3) throw InvalidDimension("y_n requires N >= 3");
    return 2.0 / spec.dim * chebyshev_trace(spec, n) + pretrace_boundary(n, spec.dim);
}

std::vector<double> y_all(const Spectrum& spec, int nmax) {
    if (spec.dim < 3) throw InvalidDimension("y_n requires N >= 3");
    std::vector<double> y(static_cast<std::size_t>(nmax) + 1, 0.0);
    for (double e : spec.eps) {
        const auto t = chebyshev_all(nmax, e);
        for (int n = 0; n <= nmax; ++n) y[n] += t[n];
    }
    for (int n = 0; n <= nmax; ++n) y[n] = 2.0 / spec.dim * y[n] + pretrace_boundary(n, spec.dim);
    return y;
}

double y_n_scale(const Spectrum& spec, int n) {
    double acc = 0.0;
    for (double e : spec.eps) acc += std::abs(chebyshev_eval(n, e));
    return 2.0 / spec.dim * acc + pretrace_boundary(n, spec.dim);
}

double centered_chebyshev(const Spectrum& spec, int n, double mean) {
    if (n < 3) throw DomainError("centered_chebyshev: F_n is identically zero for n < 3");
    return chebyshev_trace(spec, n) - mean;
}

std::uint64_t catalan(int k) {
    if (k < 0 || k > 35) throw DomainError("catalan: k out of range [0, 35]");
    std::uint64_t c = 1;
    // C_{j+1} = C_j * 2(2j+1)/(j+2), exact in integers at every step.
    for (int j = 0; j < k; ++j)
        c = static_cast<std::uint64_t>(static_cast<unsigned __int128>(c) * (4 * j + 2) / (j + 2));
    return c;
}

double gue_moment(int k, double N) {
    if (k < 0) throw DomainError("gue_moment: k < 0");
    double mm2 = 1.0, mm1 = 1.0;  // m_0, m_1
    if (k <= 1) return 1.0;
    const double inv_n2 = 1.0 / (N * N);
    for (int j = 2; j <= k; ++j) {
        const double mj =
            ((4.0 * j - 2.0) * mm1 + (j - 1.0) * (2.0 * j - 1.0) * (2.0 * j - 3.0) * inv_n2 * mm2) / (j + 1.0);
        mm2 = mm1;
        mm1 = mj;
    }
    return mm1;
}

double gue_chebyshev_formula(int n, double N) {
    return (n == 1 ? -0.5 * N : 0.0) + n * (static_cast<double>(n) * n - 1.0) / (12.0 * N);
}

}  // namespace ume
