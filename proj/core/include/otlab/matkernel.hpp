#pragma once

#include <Eigen/Dense>

#include <complex>

namespace otlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Every rank and kernel-dimension decision in the library routes through this
// single relative tolerance.
inline constexpr double kRankTolScale = 1e-10;

// Desk scale. Dense solvers only, larger inputs are rejected.
inline constexpr int kMaxDim = 64;

double op_norm(const CMatrix& A);
double spectral_radius(const CMatrix& T);

CMatrix hermitize(const CMatrix& A);
bool is_hermitian(const CMatrix& A, double tol_scale = 1e-8);

struct EigDecomp {
  CVector values;
  CMatrix vectors;        // unit columns, T v_j = values_j v_j up to residual
  double residual = 0.0;  // max_j |T v_j - values_j v_j|
  double vector_cond = 0.0;
  bool defective = false;
};

// Dense eigendecomposition for dim <= kMaxDim. defective is set when the
// eigenvector matrix has condition number above 1/tol (or is singular).
EigDecomp eig_general(const CMatrix& T, double tol = 1e-10);

struct HermEig {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

// Requires A = A* up to 1e-8 * ||A||; reconstruction error <= 1e-12 * ||A||.
HermEig eig_hermitian(const CMatrix& A);

// p in {1/2, -1/2, -1}. Input must be PSD; negative powers need a trivial
// kernel at the rank tolerance.
CMatrix psd_power(const CMatrix& A, double p);

// Smallest singular value above the rank tolerance; +infinity for the zero
// matrix. rank_tol < 0 means kRankTolScale * ||A||.
double reduced_min_modulus(const CMatrix& A, double rank_tol = -1.0);

int rank_of(const CMatrix& A, double rank_tol = -1.0);

CMatrix kron(const CMatrix& A, const CMatrix& B);

}  // namespace otlab
