#include "otlab/cesaro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace otlab {

namespace {

// Eigenvalues this close are treated as one cluster everywhere below.
constexpr double kClusterTol = 1e-7;

void check_square(const CMatrix& T, const char* who) {
  if (T.rows() != T.cols() || T.rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": square nonempty matrix required");
  }
}

struct Cluster {
  Complex rep;
  std::vector<int> members;
};

std::vector<Cluster> peripheral_clusters(const CVector& values) {
  std::vector<Cluster> out;
  for (int i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) < 1.0 - kPeripheralBand) continue;
    bool placed = false;
    for (auto& c : out) {
      if (std::abs(values(i) - c.rep) <= kClusterTol) {
        c.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) out.push_back(Cluster{values(i), {i}});
  }
  return out;
}

bool modulus_ambiguous(const CVector& values) {
  for (int i = 0; i < values.size(); ++i) {
    double m = std::abs(values(i));
    if (m > 1.0 - kAmbiguousBand && m < 1.0 - kPeripheralBand) return true;
    if (m > 1.0 + kPeripheralBand && m < 1.0 + kAmbiguousBand) return true;
  }
  return false;
}

// Masked Gram transport: A = S^{-*} M S^{-1} with M the Gram matrix of the
// eigenvector columns restricted to pairs of equal peripheral eigenvalues.
CMatrix masked_limit(const EigDecomp& eig) {
  const auto n = eig.vectors.rows();
  CMatrix G = eig.vectors.adjoint() * eig.vectors;
  CMatrix M = CMatrix::Zero(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    if (std::abs(eig.values(l)) < 1.0 - kPeripheralBand) continue;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(eig.values(k)) < 1.0 - kPeripheralBand) continue;
      if (std::abs(eig.values(l) - eig.values(k)) <= kClusterTol) M(l, k) = G(l, k);
    }
  }
  CMatrix Sinv = eig.vectors.partialPivLu().inverse();
  return hermitize(Sinv.adjoint() * M * Sinv);
}

void reject_unusable_spectrum(const EigDecomp& eig, const char* who) {
  if (eig.defective) {
    throw std::invalid_argument(std::string(who) + ": eigenvector basis is defective or too ill-conditioned");
  }
  if (modulus_ambiguous(eig.values)) {
    throw std::invalid_argument(std::string(who) + ": eigenvalue modulus in the ambiguous band");
  }
  for (int i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i)) > 1.0 + kPeripheralBand) {
      throw std::invalid_argument(std::string(who) + ": input is not power bounded");
    }
  }
}

}  // namespace

PowerBoundedReport classify_power_bounded(const CMatrix& T, double tol, int horizon) {
  check_square(T, "otlab::classify_power_bounded");
  if (horizon < 4) {
    throw std::invalid_argument("otlab::classify_power_bounded: horizon too short");
  }
  PowerBoundedReport rep;
  rep.spectral_radius = spectral_radius(T);

  double sup_half = 0.0, sup_full = 0.0;
  {
    CMatrix P = CMatrix::Identity(T.rows(), T.cols());
    for (int n = 1; n <= horizon; ++n) {
      P = T * P;
      double s = op_norm(P);
      sup_full = std::max(sup_full, s);
      if (n <= horizon / 2) sup_half = std::max(sup_half, s);
      if (!std::isfinite(s) || s > 1e12) {
        sup_full = s;
        break;
      }
    }
  }
  rep.empirical_sup = std::max(1.0, sup_full);
  bool plateau = std::isfinite(sup_full) && sup_full <= sup_half * 1.05;

  EigDecomp eig = eig_general(T, tol);
  double rank_tol = 1e-6 * std::max(1.0, op_norm(T));
  bool semisimple_peripheral = true;
  for (const Cluster& c : peripheral_clusters(eig.values)) {
    PeripheralCluster pc;
    pc.value = c.rep;
    pc.algebraic = static_cast<int>(c.members.size());
    CMatrix shifted = T - c.rep * CMatrix::Identity(T.rows(), T.cols());
    pc.geometric = static_cast<int>(T.rows()) - rank_of(shifted, rank_tol);
    if (pc.geometric < pc.algebraic) semisimple_peripheral = false;
    rep.peripheral.push_back(pc);
  }

  if (rep.spectral_radius >= 1.0 + kAmbiguousBand) {
    rep.bounded = false;
    rep.verdict_source = plateau ? PowerBoundedReport::Source::spectral
                                 : PowerBoundedReport::Source::both;
    if (plateau) {
      rep.warnings.push_back("powers did not grow over the sampled horizon; the radius decides");
    }
    return rep;
  }
  if (eig.defective || modulus_ambiguous(eig.values)) {
    rep.bounded = plateau;
    rep.verdict_source = PowerBoundedReport::Source::empirical;
    rep.warnings.push_back(eig.defective
                               ? "defective or ill-conditioned eigenvector basis; sampled verdict only"
                               : "eigenvalue modulus in the ambiguous band; sampled verdict only");
    return rep;
  }
  rep.bounded = semisimple_peripheral;
  if (rep.bounded == plateau) {
    rep.verdict_source = PowerBoundedReport::Source::both;
  } else {
    rep.verdict_source = PowerBoundedReport::Source::spectral;
    rep.warnings.push_back("sampled power norms disagree with the spectral verdict");
  }
  return rep;
}

CesaroLimit cesaro_limit_iterative(const CMatrix& T, double tol, long long max_n) {
  check_square(T, "otlab::cesaro_limit_iterative");
  if (!(tol > 0.0) || max_n < 4) {
    throw std::invalid_argument("otlab::cesaro_limit_iterative: bad tolerance or budget");
  }
  CesaroLimit out;
  out.method = CesaroLimit::Method::iterative;

  const auto d = T.rows();
  CMatrix Q = CMatrix::Identity(d, d);  // T*^j T^j
  CMatrix sum = CMatrix::Zero(d, d);
  CMatrix prev_mean = CMatrix::Zero(d, d);
  long long checkpoint = 16;
  for (long long n = 1; n <= max_n; ++n) {
    Q = T.adjoint() * Q * T;
    sum += Q;
    double qn = Q.cwiseAbs().maxCoeff();
    if (!std::isfinite(qn) || qn > 1e12) {
      throw std::runtime_error("otlab::cesaro_limit_iterative: powers blew up; input is not power bounded");
    }
    if (n == checkpoint || n == max_n) {
      CMatrix mean = sum / static_cast<double>(n);
      out.residual = op_norm(mean - prev_mean);
      out.iterations = n;
      if (n > 16 && out.residual <= tol) {
        out.A = hermitize(mean);
        return out;
      }
      prev_mean = mean;
      checkpoint *= 2;
    }
  }
  out.A = hermitize(sum / static_cast<double>(out.iterations));
  out.warnings.push_back("tolerance not met within the iteration budget");
  return out;
}

CesaroLimit cesaro_limit_spectral(const CMatrix& T) {
  check_square(T, "otlab::cesaro_limit_spectral");
  EigDecomp eig = eig_general(T);
  reject_unusable_spectrum(eig, "otlab::cesaro_limit_spectral");

  CesaroLimit out;
  out.method = CesaroLimit::Method::spectral;
  out.A = masked_limit(eig);
  out.residual = op_norm(T.adjoint() * out.A * T - out.A);
  if (eig.vector_cond > 1e8) {
    out.warnings.push_back("ill-conditioned eigenvector basis; the residual is the trust measure");
  }
  return out;
}

SotLimitResult sot_limit_exists(const CMatrix& T, double tol) {
  check_square(T, "otlab::sot_limit_exists");
  EigDecomp eig = eig_general(T);
  reject_unusable_spectrum(eig, "otlab::sot_limit_exists");

  SotLimitResult out;
  std::vector<Cluster> clusters = peripheral_clusters(eig.values);
  std::vector<CMatrix> bases;
  for (const Cluster& c : clusters) {
    CMatrix cols(eig.vectors.rows(), c.members.size());
    for (std::size_t j = 0; j < c.members.size(); ++j) cols.col(j) = eig.vectors.col(c.members[j]);
    Eigen::HouseholderQR<CMatrix> qr(cols);
    CMatrix Qthin = qr.householderQ() * CMatrix::Identity(cols.rows(), cols.cols());
    bases.push_back(Qthin);
  }
  out.exists = true;
  for (std::size_t a = 0; a < bases.size() && out.exists; ++a) {
    for (std::size_t b = a + 1; b < bases.size(); ++b) {
      double overlap = op_norm(bases[a].adjoint() * bases[b]);
      if (overlap > tol) {
        std::ostringstream os;
        os << "peripheral eigenspaces overlap (||Q1* Q2|| = " << overlap << ")";
        out.warnings.push_back(os.str());
        out.exists = false;
        break;
      }
    }
  }
  if (!out.exists) return out;

  const auto n = T.rows();
  CMatrix E = CMatrix::Zero(n, n);
  for (const Cluster& c : clusters) {
    for (int i : c.members) E(i, i) = 1.0;
  }
  CMatrix Sinv = eig.vectors.partialPivLu().inverse();
  CMatrix P = eig.vectors * E * Sinv;
  out.limit = hermitize(P.adjoint() * P);
  if (eig.vector_cond > 1e8) {
    out.warnings.push_back("ill-conditioned eigenvector basis");
  }
  return out;
}

C11Construction construct_c11(const SpectrumTarget& target, double tol) {
  if (target.stable_dim != 0) {
    throw std::invalid_argument("otlab::construct_c11: stable dimension must be 0 here");
  }
  const int d = static_cast<int>(target.values.size());
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("otlab::construct_c11: dimension out of range");
  }
  double recip = 0.0;
  for (double t : target.values) {
    if (!(t > 0.0)) {
      throw std::invalid_argument("otlab::construct_c11: prescribed values must be positive");
    }
    recip += 1.0 / t;
  }
  if (std::abs(recip - d) > tol * d) {
    throw std::invalid_argument(
        "otlab::construct_c11: the reciprocals of the prescribed values must sum to the dimension");
  }

  C11Construction out;
  out.U.resize(d, d);
  const double tau = 2.0 * std::acos(-1.0);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      double phi = tau * static_cast<double>(j) * static_cast<double>(k) / d;
      out.U(j, k) = Complex(std::cos(phi), std::sin(phi)) / std::sqrt(static_cast<double>(d));
    }
  }
  CMatrix D = CMatrix::Zero(d, d);
  CMatrix Dinv = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    D(j, j) = 1.0 / std::sqrt(target.values[j]);
    Dinv(j, j) = std::sqrt(target.values[j]);
  }
  out.S = D * out.U;
  CMatrix Sinv = out.U.adjoint() * Dinv;

  // Eigenvalues are the d-th roots of unity turned by a fixed irrational angle,
  // so they are distinct, unimodular, and never 1.
  CMatrix L = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    double phi = 1.0 / 7.0 + tau * static_cast<double>(k) / d;
    L(k, k) = Complex(std::cos(phi), std::sin(phi));
  }
  out.T = out.S * L * Sinv;
  return out;
}

LStableConstruction construct_l_stable(const SpectrumTarget& target, double tol) {
  const int l = target.stable_dim;
  const int k = static_cast<int>(target.values.size());
  if (l < 1) {
    throw std::invalid_argument("otlab::construct_l_stable: stable dimension must be positive");
  }
  if (k < 1 || l + k > kMaxDim) {
    throw std::invalid_argument("otlab::construct_l_stable: dimension out of range");
  }
  double recip = 0.0;
  for (double t : target.values) {
    if (!(t > 0.0)) {
      throw std::invalid_argument("otlab::construct_l_stable: prescribed values must be positive");
    }
    recip += 1.0 / t;
  }
  if (recip > k + tol) {
    throw std::invalid_argument(
        "otlab::construct_l_stable: the reciprocals of the prescribed values must sum to at most their count");
  }

  // Shrink the first value so the reciprocal sum saturates, then absorb the
  // shrink through a rank-one rotation that carries the stable block.
  double s = k - (recip - 1.0 / target.values[0]);
  if (!(s > 0.0)) {
    throw std::invalid_argument("otlab::construct_l_stable: no slack left for the first value");
  }
  double c = 1.0 / (target.values[0] * s);
  c = std::min(c, 1.0);

  SpectrumTarget inner;
  inner.stable_dim = 0;
  inner.values = target.values;
  inner.values[0] = c * target.values[0];
  CMatrix E = construct_c11(inner, std::max(tol, 1e-12)).T;

  double s_val = std::sqrt(std::max(0.0, 1.0 / c - 1.0));
  CMatrix R = CMatrix::Zero(l, k);
  R(0, 0) = s_val;

  const int n = l + k;
  LStableConstruction out;
  out.T = CMatrix::Zero(n, n);
  out.T.block(l, 0, k, l) = E * R.adjoint();
  out.T.block(l, l, k, k) = E;

  CMatrix blockJ = CMatrix::Zero(n, n);
  blockJ.block(0, 0, l, l) = CMatrix::Identity(l, l);
  blockJ.block(0, l, l, k) = R;
  blockJ.block(l, 0, k, l) = -R.adjoint();
  blockJ.block(l, l, k, k) = CMatrix::Identity(k, k);
  CMatrix norml = psd_power(CMatrix::Identity(l, l) + R * R.adjoint(), -0.5);
  CMatrix normr = psd_power(CMatrix::Identity(k, k) + R.adjoint() * R, -0.5);
  CMatrix normalizer = CMatrix::Zero(n, n);
  normalizer.block(0, 0, l, l) = norml;
  normalizer.block(l, l, k, k) = normr;
  out.X = blockJ * normalizer;
  return out;
}

HarmonicIdentity harmonic_identity_residual(const CMatrix& T) {
  check_square(T, "otlab::harmonic_identity_residual");
  CMatrix A_fwd = cesaro_limit_spectral(T).A;
  CMatrix A_adj = cesaro_limit_spectral(T.adjoint().eval()).A;
  CMatrix C = psd_power(A_fwd, -1.0) + psd_power(A_adj, -1.0);
  HarmonicIdentity out;
  out.residual = op_norm(C - 2.0 * CMatrix::Identity(T.rows(), T.cols()));
  HermEig h = eig_hermitian(hermitize(C));
  out.combined_eigs.assign(h.values.data(), h.values.data() + h.values.size());
  return out;
}

CMatrix contraction_asymptotic_limit(const CMatrix& T, double tol) {
  check_square(T, "otlab::contraction_asymptotic_limit");
  if (op_norm(T) > 1.0 + 1e-10) {
    throw std::invalid_argument("otlab::contraction_asymptotic_limit: input is not a contraction");
  }
  CMatrix P = T;
  CMatrix Q = hermitize(T.adjoint() * T);
  for (int it = 0; it < 200; ++it) {
    P = P * P;  // the power doubles every pass
    CMatrix Qn = hermitize(P.adjoint() * P);
    double diff = op_norm(Qn - Q);
    Q = Qn;
    if (diff <= 1e-14) {
      double idem = op_norm(Q * Q - Q);
      if (idem <= tol) return Q;
    }
  }
  throw std::runtime_error("otlab::contraction_asymptotic_limit: no convergence within the iteration budget");
}

bool loewner_leq(const CMatrix& A, const CMatrix& B, double tol) {
  check_square(A, "otlab::loewner_leq");
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw std::invalid_argument("otlab::loewner_leq: dimension mismatch");
  }
  HermEig h = eig_hermitian(hermitize(B - A));
  return h.values(0) >= -tol;
}

}  // namespace otlab
