#include "otlab/commutant.hpp"

#include "otlab/cesaro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace otlab {

namespace {

void check_triple(const BlockTriple& bt, const char* who) {
  const auto l = bt.T00.rows();
  const auto k = bt.T11.rows();
  if (l == 0 || bt.T00.cols() != l || k == 0 || bt.T11.cols() != k) {
    throw std::invalid_argument(std::string(who) + ": diagonal blocks must be square and nonempty");
  }
  if (bt.T01.rows() != l || bt.T01.cols() != k) {
    throw std::invalid_argument(std::string(who) + ": coupling block has the wrong shape");
  }
}

}  // namespace

BlockTriple make_block_triple(CMatrix T00, CMatrix T01, CMatrix T11) {
  BlockTriple bt;
  bt.T00 = std::move(T00);
  bt.T01 = std::move(T01);
  bt.T11 = std::move(T11);
  check_triple(bt, "otlab::make_block_triple");
  bt.contraction = op_norm(assemble(bt)) <= 1.0 + 1e-10;

  bool stable = spectral_radius(bt.T00) < 1.0 - kPeripheralBand;
  if (stable) {
    PowerBoundedReport rep = classify_power_bounded(bt.T11);
    stable = rep.bounded;
    EigDecomp eig = eig_general(bt.T11);
    for (int i = 0; i < eig.values.size() && stable; ++i) {
      if (std::abs(eig.values(i)) < 1.0 - kPeripheralBand) stable = false;
    }
  }
  bt.stable_part = stable;
  return bt;
}

CMatrix assemble(const BlockTriple& bt) {
  check_triple(bt, "otlab::assemble");
  const auto l = bt.T00.rows();
  const auto k = bt.T11.rows();
  CMatrix T = CMatrix::Zero(l + k, l + k);
  T.block(0, 0, l, l) = bt.T00;
  T.block(0, l, l, k) = bt.T01;
  T.block(l, l, k, k) = bt.T11;
  return T;
}

CommutantKernel injectivity_kernel(const BlockTriple& bt, double rank_tol) {
  check_triple(bt, "otlab::injectivity_kernel");
  const int l = static_cast<int>(bt.T00.rows());
  const int k = static_cast<int>(bt.T11.rows());
  const int nc = l * l;  // vec(C00) block
  const int ns = l * k;  // vec(C01) block
  if (nc + ns > kMaxDim) {
    throw std::invalid_argument("otlab::injectivity_kernel: vectorized system exceeds the desk scale");
  }

  const CMatrix Il = CMatrix::Identity(l, l);
  const CMatrix Ik = CMatrix::Identity(k, k);
  CMatrix K = CMatrix::Zero(nc + ns, nc + ns);
  K.block(0, 0, nc, nc) = kron(bt.T00.transpose(), Il) - kron(Il, bt.T00);
  K.block(nc, 0, ns, nc) = -kron(bt.T01.transpose(), Il);
  K.block(nc, nc, ns, ns) = kron(Ik, bt.T00) - kron(bt.T11.transpose(), Il);

  Eigen::JacobiSVD<CMatrix> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double scale = sv.size() > 0 ? sv(0) : 0.0;
  double tol = rank_tol >= 0.0 ? rank_tol : kRankTolScale * std::max(1.0, scale);

  CommutantKernel out;
  double kept_min = std::numeric_limits<double>::infinity();
  double dropped_max = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) {
      kept_min = std::min(kept_min, sv(i));
    } else {
      dropped_max = std::max(dropped_max, sv(i));
      CVector v = svd.matrixV().col(i);
      CMatrix C00(l, l), C01(l, k);
      for (int c = 0; c < l; ++c) {
        for (int r = 0; r < l; ++r) C00(r, c) = v(c * l + r);
      }
      for (int c = 0; c < k; ++c) {
        for (int r = 0; r < l; ++r) C01(r, c) = v(nc + c * l + r);
      }
      out.basis.emplace_back(std::move(C00), std::move(C01));
      ++out.dimension;
    }
  }
  if (out.dimension == 0 || !std::isfinite(kept_min) || dropped_max == 0.0) {
    out.singular_gap = std::numeric_limits<double>::infinity();
  } else {
    out.singular_gap = kept_min / dropped_max;
    if (out.singular_gap < 10.0) {
      out.warnings.push_back("singular values near the rank cut; the kernel dimension is fragile");
    }
  }
  return out;
}

NecessaryConditions necessary_conditions(const BlockTriple& bt) {
  check_triple(bt, "otlab::necessary_conditions");
  const int l = static_cast<int>(bt.T00.rows());
  const int k = static_cast<int>(bt.T11.rows());
  NecessaryConditions out;

  {
    CMatrix L = kron(CMatrix::Identity(l, l), bt.T11) -
                kron(bt.T00.transpose(), CMatrix::Identity(k, k));
    out.intertwining_trivial = rank_of(L) == l * k;
  }

  EigDecomp e00 = eig_general(bt.T00);
  EigDecomp e11 = eig_general(bt.T11);
  {
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < e00.values.size(); ++i) {
      for (int j = 0; j < e11.values.size(); ++j) {
        dmin = std::min(dmin, std::abs(e00.values(i) - e11.values(j)));
      }
    }
    out.spectra_meet = dmin < kSpectraDisjointTol;
    if (!out.spectra_meet && dmin < 100.0 * kSpectraDisjointTol) {
      std::ostringstream os;
      os << "spectral distance " << dmin << " barely clears the threshold";
      out.warnings.push_back(os.str());
    }
  }

  {
    out.point_spectrum_clear = true;
    for (int i = 0; i < e00.values.size(); ++i) {
      Complex mu = std::conj(e00.values(i));
      if (std::abs(mu) >= 1.0 - kPeripheralBand) {
        out.warnings.push_back("peripheral eigenvalue in the first block skipped in the adjoint test");
        continue;
      }
      if (point_spectrum_block(bt, mu).second) {
        out.point_spectrum_clear = false;
        break;
      }
    }
  }

  {
    CMatrix S = kron(CMatrix::Identity(k, k), bt.T00) -
                kron(bt.T11.transpose(), CMatrix::Identity(l, l));
    CVector b(l * k);
    for (int c = 0; c < k; ++c) {
      for (int r = 0; r < l; ++r) b(c * l + r) = bt.T01(r, c);
    }
    CVector x = S.completeOrthogonalDecomposition().solve(b);
    double resid = (S * x - b).norm();
    out.t01_outside_range = resid > 1e-8 * std::max(1.0, b.norm());
  }
  return out;
}

std::pair<bool, bool> point_spectrum_block(const BlockTriple& bt, Complex lambda, double tol) {
  check_triple(bt, "otlab::point_spectrum_block");
  if (std::abs(lambda) >= 1.0) {
    throw std::invalid_argument("otlab::point_spectrum_block: only the open disk is characterized");
  }
  const int l = static_cast<int>(bt.T00.rows());
  const int k = static_cast<int>(bt.T11.rows());
  const CMatrix Il = CMatrix::Identity(l, l);
  const CMatrix Ik = CMatrix::Identity(k, k);

  auto rtol = [tol](const CMatrix& M) { return tol * std::max(1.0, op_norm(M)); };

  bool forward;
  {
    CMatrix shifted = assemble(bt) - lambda * CMatrix::Identity(l + k, l + k);
    forward = rank_of(shifted, rtol(shifted)) < l + k;
  }

  bool adjoint = false;
  {
    CMatrix M11 = bt.T11.adjoint() - lambda * Ik;
    if (rank_of(M11, rtol(M11)) < k) {
      adjoint = true;
    } else {
      CMatrix M00 = bt.T00.adjoint() - lambda * Il;
      Eigen::JacobiSVD<CMatrix> svd(M00, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      double cut = rtol(M00);
      std::vector<int> null_cols;
      for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) <= cut) null_cols.push_back(i);
      }
      if (!null_cols.empty()) {
        CMatrix N(l, null_cols.size());
        for (std::size_t j = 0; j < null_cols.size(); ++j) N.col(j) = svd.matrixV().col(null_cols[j]);
        CMatrix W = bt.T01.adjoint() * N;
        // ran(T11* - lambda) is the orthocomplement of ker(T11 - conj(lambda)).
        CMatrix M11c = bt.T11 - std::conj(lambda) * Ik;
        Eigen::JacobiSVD<CMatrix> svd2(M11c, Eigen::ComputeFullV);
        const auto& sv2 = svd2.singularValues();
        double cut2 = rtol(M11c);
        std::vector<int> ker2;
        for (int i = 0; i < sv2.size(); ++i) {
          if (sv2(i) <= cut2) ker2.push_back(i);
        }
        if (ker2.empty()) {
          adjoint = true;
        } else {
          CMatrix Q(k, ker2.size());
          for (std::size_t j = 0; j < ker2.size(); ++j) Q.col(j) = svd2.matrixV().col(ker2[j]);
          CMatrix G = Q.adjoint() * W;
          adjoint = rank_of(G, tol) < static_cast<int>(null_cols.size());
        }
      }
    }
  }
  return {forward, adjoint};
}

bool dense_range_disjoint(const CMatrix& A, const CMatrix& B) {
  if (A.rows() == 0 || B.rows() == 0) {
    throw std::invalid_argument("otlab::dense_range_disjoint: nonempty matrices required");
  }
  if (A.cols() != B.cols()) {
    throw std::invalid_argument("otlab::dense_range_disjoint: the adjoint ranges live in different spaces");
  }
  int ra = rank_of(A);
  int rb = rank_of(B);
  if (ra < A.rows() || rb < B.rows()) return false;
  // rank of [A* B*] equals the rank of the stacked [A; B].
  CMatrix tall(A.rows() + B.rows(), A.cols());
  tall.topRows(A.rows()) = A;
  tall.bottomRows(B.rows()) = B;
  return rank_of(tall) == ra + rb;
}

}  // namespace otlab
