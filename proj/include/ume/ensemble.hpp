#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

#include "ume/errors.hpp"
#include "ume/rng.hpp"

namespace ume {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Canonical ensemble state: phases phi_{mu,nu} for mu < nu, row-major over the
// upper triangle.  phi_{nu,mu} = -phi_{mu,nu} is implied.
struct PhaseConfiguration {
    int size = 0;
    std::vector<double> phases;

    static std::size_t pair_count(int n) { return static_cast<std::size_t>(n) * (n - 1) / 2; }
    std::size_t index(int mu, int nu) const;  // requires mu < nu
    // Phase of the ordered pair, antisymmetric (not wrapped).
    double phase(int mu, int nu) const;
    bool valid() const;
};

enum class MatrixKind { UME, GUE, SCALED };

struct HermitianMatrix {
    int dim = 0;
    CMatrix entries;
    MatrixKind kind = MatrixKind::UME;
    // For SCALED matrices: the kind of the source before scaling.
    MatrixKind source = MatrixKind::UME;
};

PhaseConfiguration sample_phases(int n, const SeedSpec& seed);
PhaseConfiguration zero_phases(int n);

HermitianMatrix build_ume(const PhaseConfiguration& phi);

// GUE with weight exp(-Tr H^2 / 2): <|H_{mu nu}|^2> = 1 off the diagonal and the
// diagonal is real with variance 1.
HermitianMatrix build_gue(int n, const SeedSpec& seed);

// W = M / (2 sqrt(N-2)).
HermitianMatrix scale_matrix(const HermitianMatrix& m);
double scale_divisor(int n);

}  // namespace ume
