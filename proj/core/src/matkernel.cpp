#include "otlab/matkernel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace otlab {

namespace {

void check_square(const CMatrix& A, const char* fn) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument(std::string("otlab::") + fn + ": matrix must be square and nonempty");
  }
}

void check_dim(const CMatrix& A, const char* fn) {
  if (A.rows() > kMaxDim || A.cols() > kMaxDim) {
    throw std::invalid_argument(std::string("otlab::") + fn + ": dimension exceeds the dense-solver cap");
  }
}

}  // namespace

double op_norm(const CMatrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(A);
  return svd.singularValues()(0);
}

double spectral_radius(const CMatrix& T) {
  check_square(T, "spectral_radius");
  Eigen::ComplexEigenSolver<CMatrix> es(T, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("otlab::spectral_radius: eigenvalue iteration failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

CMatrix hermitize(const CMatrix& A) {
  check_square(A, "hermitize");
  return 0.5 * (A + A.adjoint());
}

bool is_hermitian(const CMatrix& A, double tol_scale) {
  if (A.rows() != A.cols()) return false;
  double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol_scale * scale;
}

EigDecomp eig_general(const CMatrix& T, double tol) {
  check_square(T, "eig_general");
  check_dim(T, "eig_general");
  Eigen::ComplexEigenSolver<CMatrix> es(T, true);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("otlab::eig_general: eigenvalue iteration failed");
  }
  EigDecomp out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  const auto n = T.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double len = out.vectors.col(j).norm();
    if (len > 0) out.vectors.col(j) /= len;
    double r = (T * out.vectors.col(j) - out.values(j) * out.vectors.col(j)).norm();
    out.residual = std::max(out.residual, r);
  }
  Eigen::JacobiSVD<CMatrix> svd(out.vectors);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(n - 1);
  if (smin <= 0) {
    out.vector_cond = std::numeric_limits<double>::infinity();
    out.defective = true;
  } else {
    out.vector_cond = smax / smin;
    out.defective = out.vector_cond > 1.0 / tol;
  }
  return out;
}

HermEig eig_hermitian(const CMatrix& A) {
  check_square(A, "eig_hermitian");
  check_dim(A, "eig_hermitian");
  if (!is_hermitian(A)) {
    throw std::invalid_argument("otlab::eig_hermitian: matrix is not hermitian");
  }
  CMatrix H = hermitize(A);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("otlab::eig_hermitian: eigenvalue iteration failed");
  }
  HermEig out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  CMatrix R = out.vectors * out.values.asDiagonal().toDenseMatrix().cast<Complex>() *
                  out.vectors.adjoint() -
              H;
  if (R.cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::runtime_error("otlab::eig_hermitian: reconstruction check failed");
  }
  return out;
}

CMatrix psd_power(const CMatrix& A, double p) {
  if (p != 0.5 && p != -0.5 && p != -1.0) {
    throw std::invalid_argument("otlab::psd_power: exponent must be 1/2, -1/2 or -1");
  }
  HermEig eig = eig_hermitian(A);
  const auto n = eig.values.size();
  double scale = eig.values.cwiseAbs().maxCoeff();
  double tol = kRankTolScale * scale;
  RVector f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = eig.values(i);
    if (v < -10.0 * tol) {
      throw std::invalid_argument("otlab::psd_power: matrix is not positive semidefinite");
    }
    v = std::max(v, 0.0);
    if (p == 0.5) {
      f(i) = std::sqrt(v);
    } else {
      if (v <= tol) {
        throw std::invalid_argument("otlab::psd_power: kernel at the rank tolerance");
      }
      f(i) = (p == -1.0) ? 1.0 / v : 1.0 / std::sqrt(v);
    }
  }
  CMatrix out = eig.vectors * f.asDiagonal().toDenseMatrix().cast<Complex>() *
                eig.vectors.adjoint();
  return hermitize(out);
}

double reduced_min_modulus(const CMatrix& A, double rank_tol) {
  Eigen::JacobiSVD<CMatrix> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return std::numeric_limits<double>::infinity();
  double tol = rank_tol < 0 ? kRankTolScale * sv(0) : rank_tol;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) best = sv(i);
  }
  return best;
}

int rank_of(const CMatrix& A, double rank_tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(A);
  const auto& sv = svd.singularValues();
  double tol = rank_tol < 0 ? kRankTolScale * sv(0) : rank_tol;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++r;
  }
  return r;
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return out;
}

}  // namespace otlab
