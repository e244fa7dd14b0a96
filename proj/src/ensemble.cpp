#include "ume/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ume {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::size_t PhaseConfiguration::index(int mu, int nu) const {
    // Rows 0..mu-1 hold (size-1) + ... + (size-mu) entries.
    const auto m = static_cast<std::size_t>(mu);
    return m * static_cast<std::size_t>(size) - m * (m + 1) / 2 + static_cast<std::size_t>(nu - mu - 1);
}

double PhaseConfiguration::phase(int mu, int nu) const {
    if (mu == nu) return 0.0;
    return mu < nu ? phases[index(mu, nu)] : -phases[index(nu, mu)];
}

bool PhaseConfiguration::valid() const {
    if (size < 2 || phases.size() != pair_count(size)) return false;
    for (double p : phases)
        if (!(p >= 0.0 && p < kTwoPi)) return false;
    return true;
}

PhaseConfiguration sample_phases(int n, const SeedSpec& seed) {
    if (n < 2) throw InvalidDimension("sample_phases: N must be >= 2, got " + std::to_string(n));
    CounterRng rng(seed);
    PhaseConfiguration phi{n, std::vector<double>(PhaseConfiguration::pair_count(n))};
    for (double& p : phi.phases) {
        p = kTwoPi * rng.uniform();
        if (p >= kTwoPi) p = 0.0;  // rounding guard
    }
    return phi;
}

PhaseConfiguration zero_phases(int n) {
    if (n < 2) throw InvalidDimension("zero_phases: N must be >= 2");
    return {n, std::vector<double>(PhaseConfiguration::pair_count(n), 0.0)};
}

HermitianMatrix build_ume(const PhaseConfiguration& phi) {
    const int n = phi.size;
    HermitianMatrix m{n, CMatrix::Zero(n, n), MatrixKind::UME, MatrixKind::UME};
    std::size_t k = 0;
    for (int mu = 0; mu < n; ++mu)
        for (int nu = mu + 1; nu < n; ++nu, ++k) {
            const cplx z = std::polar(1.0, phi.phases[k]);
            m.entries(mu, nu) = z;
            m.entries(nu, mu) = std::conj(z);
        }
    return m;
}

HermitianMatrix build_gue(int n, const SeedSpec& seed) {
    if (n < 1) throw InvalidDimension("build_gue: N must be >= 1");
    CounterRng rng(seed);
    HermitianMatrix h{n, CMatrix::Zero(n, n), MatrixKind::GUE, MatrixKind::GUE};
    const double s = std::sqrt(0.5);
    for (int mu = 0; mu < n; ++mu) {
        h.entries(mu, mu) = rng.normal();
        for (int nu = mu + 1; nu < n; ++nu) {
            const double re = s * rng.normal();
            const double im = s * rng.normal();
            h.entries(mu, nu) = {re, im};
            h.entries(nu, mu) = {re, -im};
        }
    }
    return h;
}

double scale_divisor(int n) {
    if (n < 3) throw InvalidDimension("scaling needs N >= 3, got " + std::to_string(n));
    return 2.0 * std::sqrt(static_cast<double>(n - 2));
}

HermitianMatrix scale_matrix(const HermitianMatrix& m) {
    const double d = scale_divisor(m.dim);
    return {m.dim, m.entries / d, MatrixKind::SCALED, m.kind};
}

}  // namespace ume
