#pragma once

#include "otlab/matkernel.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace otlab {

// Peripheral band: |lambda| >= 1 - kPeripheralBand counts as on the circle.
// Moduli inside (1 - kAmbiguousBand, 1 - kPeripheralBand) are rejected as
// ambiguous rather than silently classified.
inline constexpr double kPeripheralBand = 1e-8;
inline constexpr double kAmbiguousBand = 1e-6;

struct PeripheralCluster {
  Complex value;       // cluster representative
  int algebraic = 0;   // eigenvalues in the cluster
  int geometric = 0;   // kernel dimension at the representative
};

struct PowerBoundedReport {
  bool bounded = false;
  double spectral_radius = 0.0;
  std::vector<PeripheralCluster> peripheral;
  double empirical_sup = 0.0;  // max ||T^n|| over the sampled horizon
  enum class Source { spectral, empirical, both } verdict_source = Source::both;
  std::vector<std::string> warnings;
};

// Spectral classification (radius + semisimple peripheral part) cross-checked
// against sampled power norms. A defective eigenvector basis demotes the
// verdict to the empirical source with a warning.
PowerBoundedReport classify_power_bounded(const CMatrix& T, double tol = 1e-8, int horizon = 500);

struct CesaroLimit {
  CMatrix A;
  enum class Method { iterative, spectral } method = Method::iterative;
  long long iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

// (1/n) sum of T*^j T^j iterated with doubling Cauchy checkpoints.
CesaroLimit cesaro_limit_iterative(const CMatrix& T, double tol = 1e-3, long long max_n = 200000);

// S^{-*} M S^{-1} with the Gram matrix of eigenvector columns masked to pairs
// of equal peripheral eigenvalues.
CesaroLimit cesaro_limit_spectral(const CMatrix& T);

struct SotLimitResult {
  bool exists = false;
  std::optional<CMatrix> limit;  // certified of the form P*P when it exists
  std::vector<std::string> warnings;
};

// T*^n T^n converges iff peripheral eigenspaces to distinct eigenvalues are
// mutually orthogonal.
SotLimitResult sot_limit_exists(const CMatrix& T, double tol = 1e-8);

struct SpectrumTarget {
  std::vector<double> values;  // prescribed positive eigenvalues t_j
  int stable_dim = 0;          // dimension of the prescribed kernel
};

struct C11Construction {
  CMatrix T;
  CMatrix S;  // T = S (rotated DFT spectrum) S^{-1}
  CMatrix U;  // unitary DFT factor of S
};

// Invertible realization with prescribed Cesaro limit spectrum {t_j}; needs
// stable_dim = 0 and sum of 1/t_j equal to the dimension (within tol).
C11Construction construct_c11(const SpectrumTarget& target, double tol = 1e-8);

struct LStableConstruction {
  CMatrix T;
  CMatrix X;  // unitary; X* A X = 0_l (+) diag(t)
};

// Realization with an l-dimensional stable subspace and prescribed nonzero
// Cesaro spectrum {t_j}; needs sum of 1/t_j <= number of values.
LStableConstruction construct_l_stable(const SpectrumTarget& target, double tol = 1e-8);

struct HarmonicIdentity {
  double residual = 0.0;               // ||A_T^{-1} + A_{T*}^{-1} - 2 I||
  std::vector<double> combined_eigs;   // spectrum of A_T^{-1} + A_{T*}^{-1}
};

// Exact in dimension 2 for invertible limits; the 3x3 counterexample breaks it.
HarmonicIdentity harmonic_identity_residual(const CMatrix& T);

// Limit of T*^n T^n for a contraction, certified idempotent within tol.
CMatrix contraction_asymptotic_limit(const CMatrix& T, double tol = 1e-6);

// A <= B in the positive semidefinite order, within tol.
bool loewner_leq(const CMatrix& A, const CMatrix& B, double tol = 1e-10);

}  // namespace otlab
