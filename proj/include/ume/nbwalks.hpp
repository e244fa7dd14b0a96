#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "ume/ensemble.hpp"

namespace ume {

struct DirectedEdge {
    int origin;
    int terminus;
};

// All N(N-1) directed edges of the complete graph K_N.
class DirectedEdgeSpace {
public:
    explicit DirectedEdgeSpace(int n);

    int vertices() const { return n_; }
    int size() const { return static_cast<int>(edges_.size()); }
    const DirectedEdge& edge(int e) const { return edges_[e]; }
    int index(int origin, int terminus) const {
        return origin * (n_ - 1) + (terminus < origin ? terminus : terminus - 1);
    }
    int reversal(int e) const { return reversal_[e]; }
    // Edges e' with o(e') = tau(e) and e' != reversal(e): the N-2 non-backtracking continuations.
    const std::vector<int>& successors(int e) const { return succ_[e]; }
    // Undirected pair index (matching PhaseConfiguration order) and orientation +1 / -1.
    int pair(int e) const { return pair_[e]; }
    int orientation(int e) const { return orient_[e]; }

private:
    int n_;
    std::vector<DirectedEdge> edges_;
    std::vector<int> reversal_;
    std::vector<std::vector<int>> succ_;
    std::vector<int> pair_;
    std::vector<int> orient_;
};

enum class OperatorKind { B, Y };

// Dense operator on directed edges; entry (e', e) links e to its continuation e'.
struct MagneticOperator {
    OperatorKind kind = OperatorKind::Y;
    int n = 0;
    CMatrix entries;
};

// The edge e = (mu -> nu) carries phase phi_{mu nu}.
double edge_phase(const DirectedEdgeSpace& space, const PhaseConfiguration& phi, int e);

MagneticOperator magnetic_connectivity(const PhaseConfiguration& phi);  // B
MagneticOperator hashimoto(const PhaseConfiguration& phi);              // Y = B - J

// (1/N) Tr Y^n / (N-2)^{n/2} for n = 0..nmax by repeated dense-times-sparse products.
std::vector<double> hashimoto_normalized_traces(const PhaseConfiguration& phi, int nmax);
// Tr Y^n (unnormalized, complex part dropped) for n = 0..nmax.
std::vector<double> hashimoto_traces(const PhaseConfiguration& phi, int nmax);

// |LHS - RHS| / max(|LHS|, |RHS|) of
//   det(eta I - Y) = (eta^2 - 1)^{N(N-3)/2} det((eta^2 + N - 2) I - eta M),
// evaluated with log-determinants.
double bass_residual(const PhaseConfiguration& phi, std::complex<double> eta);

// Largest distance in a greedy multiset matching between the eigenvalues of Y and
// the images of the M-spectrum (roots of eta^2 - lambda eta + N - 2, plus +-1 with
// multiplicity N(N-3)/2 each).
double bass_spectrum_mismatch(const PhaseConfiguration& phi);

struct EnumerationBudget {
    double max_partial_walks = 1e8;
};

struct WalkTally {
    int n_vertices = 0;
    int length = 0;
    std::uint64_t count = 0;
    // Number of distinct nonzero net-traversal signatures seen (retracing counts only).
    std::uint64_t classes = 0;
};

// Periodic non-backtracking walks of length n on K_N, counted as rooted sequences.
WalkTally enumerate_nbw(int N, int n, EnumerationBudget budget = {});
// Walks whose net traversal count vanishes on every undirected edge: exactly <Tr Y^n>.
WalkTally enumerate_zero_phase_walks(int N, int n, EnumerationBudget budget = {});
// Pairs (w, w') with net traversal vectors kappa_w = -kappa_w' != 0: exactly Cov(Tr Y^n, Tr Y^m).
WalkTally enumerate_retracing_pairs(int N, int n, int m, EnumerationBudget budget = {});

// Leading <y_{2n}>: 0 for n < 5 (exact), n(n-4)/N^2 at n = 5, and
// n/(6N^2) [(n+1)(n-4) + 3(n-5)] for n >= 6.
double expected_y2n_formula(int n, double N);
// Leading <Tr T_{2n}(W)>; the n < 5 branch -(N/2)(N-3)/(N-2)^n is exact.
double expected_chebyshev_formula(int n, double N);
// <Tr T_n(W)> for any n >= 0 (odd traces have zero mean).
double chebyshev_mean_closed_form(int n, double N);

// n/4 - n(n+1)/(2N); N = infinity is allowed.
double variance_formula(int n, double N);

struct CovariancePrediction {
    double value = 0.0;
    bool covered = true;  // false for even |n-m| < 6, where no closed form is given
};
// Cov(y_n, y_m): 0 for odd |n-m|, nm/N^3 for even |n-m| >= 6.
CovariancePrediction covariance_formula(int n, int m, double N);

}  // namespace ume
