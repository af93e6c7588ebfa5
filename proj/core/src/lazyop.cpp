#include "otlab/lazyop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace otlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(const BasisIndex& u) {
  std::ostringstream os;
  switch (u.tag) {
    case BasisIndex::Tag::integer:
      os << "Int(" << u.a << ")";
      break;
    case BasisIndex::Tag::natural:
      os << "Nat(" << u.a << ")";
      break;
    case BasisIndex::Tag::pair:
      os << "Pair(" << u.a << "," << u.b << ")";
      break;
    case BasisIndex::Tag::tree:
      os << "Tree(" << u.a << "," << u.b << ")";
      break;
  }
  if (u.space != 0) os << "@" << u.space;
  return os.str();
}

FinVec FinVec::basis(const BasisIndex& u, Complex coeff) {
  FinVec v;
  v.add(u, coeff);
  return v;
}

void FinVec::add(const BasisIndex& u, Complex coeff) {
  if (coeff == Complex(0.0, 0.0)) return;
  auto [it, inserted] = m_.try_emplace(u, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == Complex(0.0, 0.0)) m_.erase(it);
  }
}

Complex FinVec::coeff(const BasisIndex& u) const {
  auto it = m_.find(u);
  return it == m_.end() ? Complex(0.0, 0.0) : it->second;
}

double FinVec::norm_sq() const {
  double s = 0.0;
  for (const auto& [u, z] : m_) s += std::norm(z);
  return s;
}

double FinVec::norm() const { return std::sqrt(norm_sq()); }

FinVec& FinVec::operator+=(const FinVec& y) {
  for (const auto& [u, z] : y.m_) add(u, z);
  return *this;
}

FinVec& FinVec::operator-=(const FinVec& y) {
  for (const auto& [u, z] : y.m_) add(u, -z);
  return *this;
}

FinVec& FinVec::operator*=(Complex s) {
  if (s == Complex(0.0, 0.0)) {
    m_.clear();
    return *this;
  }
  for (auto& [u, z] : m_) z *= s;
  return *this;
}

FinVec operator+(FinVec x, const FinVec& y) {
  x += y;
  return x;
}

FinVec operator-(FinVec x, const FinVec& y) {
  x -= y;
  return x;
}

FinVec operator*(Complex s, FinVec x) {
  x *= s;
  return x;
}

Complex inner(const FinVec& x, const FinVec& y) {
  const FinVec& small = x.support_size() <= y.support_size() ? x : y;
  const FinVec& big = x.support_size() <= y.support_size() ? y : x;
  Complex s = 0.0;
  bool x_small = &small == &x;
  for (const auto& [u, z] : small.entries()) {
    Complex w = big.coeff(u);
    s += x_small ? z * std::conj(w) : w * std::conj(z);
  }
  return s;
}

FinVec apply(const LazyOperator& T, const FinVec& x, std::size_t cap) {
  if (!T.apply_basis) {
    throw std::invalid_argument("otlab::apply: operator has no forward action");
  }
  FinVec out;
  for (const auto& [u, xi] : x.entries()) {
    if (T.accepts && !T.accepts(u)) {
      throw std::invalid_argument("otlab::apply: index outside the operator domain: " + to_string(u));
    }
    FinVec img = T.apply_basis(u);
    for (const auto& [v, c] : img.entries()) out.add(v, xi * c);
    if (out.support_size() > cap) {
      throw std::runtime_error("otlab::apply: support cap exceeded");
    }
  }
  return out;
}

FinVec apply_adjoint(const LazyOperator& T, const FinVec& x, std::size_t cap) {
  if (!T.adjoint_basis) {
    throw std::invalid_argument("otlab::apply_adjoint: operator has no adjoint action");
  }
  FinVec out;
  for (const auto& [u, xi] : x.entries()) {
    FinVec img = T.adjoint_basis(u);
    for (const auto& [v, c] : img.entries()) out.add(v, xi * c);
    if (out.support_size() > cap) {
      throw std::runtime_error("otlab::apply_adjoint: support cap exceeded");
    }
  }
  return out;
}

FinVec apply_power(const LazyOperator& T, FinVec x, long long n, std::size_t cap) {
  if (n < 0) {
    throw std::invalid_argument("otlab::apply_power: power must be nonnegative");
  }
  for (long long k = 0; k < n; ++k) x = apply(T, x, cap);
  return x;
}

AsymptoticValue asymptotic_diag_value(const LazyOperator& T, const BasisIndex& u, long long n_max,
                                      double cauchy_tol) {
  if (T.accepts && !T.accepts(u)) {
    throw std::invalid_argument("otlab::asymptotic_diag_value: index outside the operator domain: " +
                                to_string(u));
  }
  if (T.diag_limit) {
    if (auto v = T.diag_limit(u)) {
      AsymptoticValue out;
      out.value = out.lo = out.hi = *v;
      out.route = AsymptoticValue::Route::closed_form;
      out.n_used = 0;
      out.note = "builder oracle";
      return out;
    }
  }
  FinVec x = FinVec::basis(u);
  double prev = 1.0;
  for (long long n = 1; n <= n_max; ++n) {
    x = apply(T, x);
    double d = x.norm_sq();
    if (d > prev * (1.0 + 1e-9)) {
      throw std::invalid_argument(
          "otlab::asymptotic_diag_value: diagonal increased; the bracketed route needs a contraction");
    }
    if (d == 0.0) {
      AsymptoticValue out;
      out.value = out.lo = out.hi = 0.0;
      out.route = AsymptoticValue::Route::bracketed;
      out.n_used = n;
      out.note = "orbit terminated; the value is exact";
      return out;
    }
    if (n >= 8 && prev - d <= cauchy_tol * std::max(1.0, d)) {
      AsymptoticValue out;
      out.value = out.hi = d;
      out.lo = 0.0;
      out.route = AsymptoticValue::Route::bracketed;
      out.n_used = n;
      out.note = "one-sided bracket from a nonincreasing diagonal; the lower bound is trivial";
      return out;
    }
    prev = d;
  }
  throw std::runtime_error("otlab::asymptotic_diag_value: no convergence within the iteration budget");
}

namespace {

struct BlockShiftState {
  std::function<CMatrix(long long)> block;
  int dim = 0;
  std::map<long long, CMatrix> a;
  std::map<long long, CMatrix> b;  // b[j] maps block j into block j+1

  const CMatrix& level(long long j) {
    auto it = a.find(j);
    if (it != a.end()) return it->second;
    CMatrix A = block(j);
    if (A.rows() != dim || A.cols() != dim) {
      throw std::invalid_argument("otlab::build_block_unishift: block has the wrong dimension");
    }
    if (!is_hermitian(A)) {
      throw std::invalid_argument("otlab::build_block_unishift: block is not hermitian");
    }
    return a.emplace(j, std::move(A)).first->second;
  }

  const CMatrix& step(long long j) {
    auto it = b.find(j);
    if (it != b.end()) return it->second;
    CMatrix B = psd_power(level(j + 1), -0.5) * psd_power(level(j), 0.5);
    return b.emplace(j, std::move(B)).first->second;
  }
};

}  // namespace

LazyOperator build_block_unishift(std::function<CMatrix(long long)> block, int dim,
                                  long long j_check) {
  if (!block) {
    throw std::invalid_argument("otlab::build_block_unishift: block callback is required");
  }
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("otlab::build_block_unishift: block dimension out of range");
  }
  if (j_check < 1) {
    throw std::invalid_argument("otlab::build_block_unishift: check horizon must be positive");
  }
  auto st = std::make_shared<BlockShiftState>();
  st->block = std::move(block);
  st->dim = dim;

  if (rank_of(st->level(1)) != dim) {
    throw std::invalid_argument("otlab::build_block_unishift: the first block must be invertible");
  }
  double bmax = 0.0;
  for (long long j = 1; j <= j_check; ++j) {
    double hi = op_norm(st->level(j));
    double lo_next = reduced_min_modulus(st->level(j + 1));
    if (hi > 1.0 + 1e-10) {
      throw std::invalid_argument("otlab::build_block_unishift: block norms must stay at most 1");
    }
    if (hi > lo_next + 1e-12) {
      throw std::invalid_argument(
          "otlab::build_block_unishift: blocks must be nested (norm of each at most the bottom of the next)");
    }
    bmax = std::max(bmax, op_norm(st->step(j)));
  }

  LazyOperator T;
  std::ostringstream os;
  os << "operator-weighted unilateral shift, block dimension " << dim;
  T.description = os.str();
  T.norm_bound = std::max(1.0, bmax);
  T.accepts = [dim](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::pair && u.space == 0 && u.a >= 1 && u.b >= 0 && u.b < dim;
  };
  T.apply_basis = [st](const BasisIndex& u) {
    const CMatrix& B = st->step(u.a);
    FinVec out;
    for (int t = 0; t < st->dim; ++t) out.add(BasisIndex::Pair(u.a + 1, t), B(t, u.b));
    return out;
  };
  T.adjoint_basis = [st](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::pair || u.space != 0 || u.a < 1 || u.b < 0 || u.b >= st->dim) {
      throw std::invalid_argument("otlab::build_block_unishift: index outside the adjoint domain");
    }
    FinVec out;
    if (u.a == 1) return out;
    const CMatrix& B = st->step(u.a - 1);
    for (int s = 0; s < st->dim; ++s) out.add(BasisIndex::Pair(u.a - 1, s), std::conj(B(u.b, s)));
    return out;
  };
  T.diag_limit = [st](const BasisIndex& u) -> std::optional<double> {
    return st->level(u.a)(u.b, u.b).real();
  };
  return T;
}

double diag_cluster_alpha(const WeightGen& lambda, long long l, long long m) {
  if (l < 1 || m < 1) {
    throw std::invalid_argument("otlab::diag_cluster_alpha: indices start at 1");
  }
  long long s = l + m;
  long long n = (s - 1) * s / 2 - (l - 1);
  return lambda.weight(n);
}

LazyOperator build_diag_cluster_shift(const WeightGen& lambda) {
  for (long long n = 1; n <= 1000; ++n) {
    double w = lambda.weight(n);
    if (!(w > 0.0)) {
      throw std::invalid_argument("otlab::build_diag_cluster_shift: values must be positive");
    }
    if (n > 1 && w + 1e-12 < lambda.weight(n - 1)) {
      throw std::invalid_argument("otlab::build_diag_cluster_shift: values must be nondecreasing");
    }
  }
  if (lambda.sup_from(1) > 1.0 + 1e-9 || lambda.weight(1000000) < 1.0 - 1e-3) {
    throw std::invalid_argument("otlab::build_diag_cluster_shift: values must increase to 1");
  }
  WeightGen lam = lambda;
  LazyOperator T;
  T.description = "antidiagonal-cluster unilateral shift over " + lam.describe();
  T.norm_bound = 1.0;
  T.accepts = [](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::pair && u.space == 0 && u.a >= 1 && u.b >= 1;
  };
  T.apply_basis = [lam](const BasisIndex& u) {
    double num = diag_cluster_alpha(lam, u.a, u.b);
    double den = diag_cluster_alpha(lam, u.a, u.b + 1);
    return FinVec::basis(BasisIndex::Pair(u.a, u.b + 1), std::sqrt(num / den));
  };
  T.adjoint_basis = [lam](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::pair || u.space != 0 || u.a < 1 || u.b < 1) {
      throw std::invalid_argument("otlab::build_diag_cluster_shift: index outside the adjoint domain");
    }
    if (u.b == 1) return FinVec{};
    double num = diag_cluster_alpha(lam, u.a, u.b - 1);
    double den = diag_cluster_alpha(lam, u.a, u.b);
    return FinVec::basis(BasisIndex::Pair(u.a, u.b - 1), std::sqrt(num / den));
  };
  T.diag_limit = [lam](const BasisIndex& u) -> std::optional<double> {
    return diag_cluster_alpha(lam, u.a, u.b);
  };
  return T;
}

namespace {

struct ConjBilateralState {
  std::function<CMatrix(long long)> level;
  std::function<CMatrix(long long)> transfer;
  int dim = 0;
  std::map<long long, CMatrix> a;
  std::map<long long, CMatrix> c;  // c[k] maps level k into level k+1

  const CMatrix& block(long long k) {
    auto it = a.find(k);
    if (it != a.end()) return it->second;
    CMatrix A = level(k);
    if (A.rows() != dim || A.cols() != dim) {
      throw std::invalid_argument("otlab::build_conjugated_bilateral: level has the wrong dimension");
    }
    if (!is_hermitian(A)) {
      throw std::invalid_argument("otlab::build_conjugated_bilateral: level is not hermitian");
    }
    return a.emplace(k, std::move(A)).first->second;
  }

  CMatrix unitary(long long k) const {
    if (!transfer) return CMatrix::Identity(dim, dim);
    CMatrix U = transfer(k);
    if (U.rows() != dim || U.cols() != dim) {
      throw std::invalid_argument("otlab::build_conjugated_bilateral: transfer has the wrong dimension");
    }
    if ((U.adjoint() * U - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10) {
      throw std::invalid_argument("otlab::build_conjugated_bilateral: transfer block is not unitary");
    }
    return U;
  }

  const CMatrix& step(long long k) {
    auto it = c.find(k);
    if (it != c.end()) return it->second;
    CMatrix C = psd_power(block(k + 1), -0.5) * unitary(k) * psd_power(block(k), 0.5);
    return c.emplace(k, std::move(C)).first->second;
  }
};

}  // namespace

LazyOperator build_conjugated_bilateral(std::function<CMatrix(long long)> level, int dim,
                                        std::function<CMatrix(long long)> transfer,
                                        long long k_check) {
  if (!level) {
    throw std::invalid_argument("otlab::build_conjugated_bilateral: level callback is required");
  }
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("otlab::build_conjugated_bilateral: level dimension out of range");
  }
  auto st = std::make_shared<ConjBilateralState>();
  st->level = std::move(level);
  st->transfer = std::move(transfer);
  st->dim = dim;

  double cmax = 0.0;
  for (long long k = -k_check; k <= k_check; ++k) cmax = std::max(cmax, op_norm(st->step(k)));

  LazyOperator T;
  std::ostringstream os;
  os << "level-conjugated bilateral operator, level dimension " << dim;
  T.description = os.str();
  T.norm_bound = std::max(1.0, cmax);
  T.accepts = [dim](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::pair && u.space == 0 && u.b >= 0 && u.b < dim;
  };
  T.apply_basis = [st](const BasisIndex& u) {
    const CMatrix& C = st->step(u.a);
    FinVec out;
    for (int t = 0; t < st->dim; ++t) out.add(BasisIndex::Pair(u.a + 1, t), C(t, u.b));
    return out;
  };
  T.adjoint_basis = [st](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::pair || u.space != 0 || u.b < 0 || u.b >= st->dim) {
      throw std::invalid_argument("otlab::build_conjugated_bilateral: index outside the adjoint domain");
    }
    const CMatrix& C = st->step(u.a - 1);
    FinVec out;
    for (int s = 0; s < st->dim; ++s) out.add(BasisIndex::Pair(u.a - 1, s), std::conj(C(u.b, s)));
    return out;
  };
  return T;
}

double conjugated_bilateral_preset_level(long long k) {
  if (k >= 0) {
    if (k > 1020) return 1.0;
    return 1.0 - std::ldexp(1.0, static_cast<int>(-k - 1));
  }
  if (k < -1020) return 0.25;
  return 0.25 + std::ldexp(1.0, static_cast<int>(k - 2));
}

LazyOperator conjugated_bilateral_preset() {
  LazyOperator T;
  T.description = "scalar level-conjugated bilateral shift, preset levels";
  T.norm_bound = 1.0;
  T.accepts = [](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::integer && u.space == 0;
  };
  T.apply_basis = [](const BasisIndex& u) {
    double w = std::sqrt(conjugated_bilateral_preset_level(u.a) /
                         conjugated_bilateral_preset_level(u.a + 1));
    return FinVec::basis(BasisIndex::Int(u.a + 1), w);
  };
  T.adjoint_basis = [](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::integer || u.space != 0) {
      throw std::invalid_argument("otlab::conjugated_bilateral_preset: index outside the adjoint domain");
    }
    double w = std::sqrt(conjugated_bilateral_preset_level(u.a - 1) /
                         conjugated_bilateral_preset_level(u.a));
    return FinVec::basis(BasisIndex::Int(u.a - 1), w);
  };
  T.diag_limit = [](const BasisIndex& u) -> std::optional<double> {
    return conjugated_bilateral_preset_level(u.a);
  };
  return T;
}

BilateralSimilarityReport bilateral_similarity_report(const WeightGen& w) {
  BilateralSimilarityReport rep;
  auto finish = [&rep](double sup, double inf, std::string detail) {
    rep.window_sup = sup;
    rep.window_inf = inf;
    rep.power_bounded = std::isfinite(sup);
    rep.similar_to_unitary = rep.power_bounded && inf > 0.0;
    rep.detail = std::move(detail);
    return rep;
  };
  auto constant_case = [&](double c) {
    double sup = c > 1.0 ? kInf : (c == 1.0 ? 1.0 : c);
    double inf = c < 1.0 ? 0.0 : (c == 1.0 ? 1.0 : c);
    return finish(sup, inf, "constant weights; a window of length n has product c^n");
  };
  switch (w.kind) {
    case WeightGen::Kind::constant:
      return constant_case(w.c);
    case WeightGen::Kind::geometric:
      if (w.c == 1.0) return constant_case(1.0);
      throw std::invalid_argument(
          "otlab::bilateral_similarity_report: geometric weights have no finite window analysis");
    case WeightGen::Kind::telescoping:
      throw std::invalid_argument(
          "otlab::bilateral_similarity_report: telescoping weights are one-sided");
    case WeightGen::Kind::run_indicator: {
      if (w.c == 1.0) return constant_case(1.0);
      if (w.c > 1.0) {
        return finish(kInf, 1.0, "runs of unbounded length with value above 1; window products are unbounded");
      }
      return finish(1.0, 0.0, "runs of unbounded length with value below 1; window products reach down to 0");
    }
    case WeightGen::Kind::exp_inv_square: {
      double total = 1.0 + 2.0 * inv_square_tail_sum(1);
      return finish(1.0, std::exp(-total),
                    "log-summable defects; the infimum is the certified two-sided product");
    }
    case WeightGen::Kind::table_then_constant:
    case WeightGen::Kind::custom: {
      double L = 1.0, R = 1.0;
      if (w.kind == WeightGen::Kind::table_then_constant) {
        R = w.c;
        L = w.left_c.value_or(w.c);
      } else if (w.declared_tail && *w.declared_tail != 1.0) {
        throw std::invalid_argument(
            "otlab::bilateral_similarity_report: a declared tail other than 1 leaves the windows unspecified");
      }
      if (w.table.empty()) return constant_case(R);
      long long m0 = w.table.begin()->first;
      long long m1 = w.table.rbegin()->first;
      if (m1 - m0 > 4096) {
        throw std::invalid_argument("otlab::bilateral_similarity_report: table span too large");
      }
      double maxP = -kInf, minP = kInf;
      for (long long a = m0; a <= m1; ++a) {
        double p = 1.0;
        for (long long b = a; b <= m1; ++b) {
          p *= w.weight(b);
          maxP = std::max(maxP, p);
          minP = std::min(minP, p);
        }
      }
      double sup = (L > 1.0 || R > 1.0) ? kInf : std::max({L, R, maxP});
      double inf = (L < 1.0 || R < 1.0) ? 0.0 : std::min({L, R, minP});
      std::ostringstream os;
      os << "finite perturbation zone [" << m0 << "," << m1 << "] between constants " << L << " and "
         << R << "; extrema over contiguous zone products";
      return finish(sup, inf, os.str());
    }
  }
  throw std::logic_error("otlab::bilateral_similarity_report: bad kind");
}

LazyOperator orthogonal_sum(std::vector<LazyOperator> ops) {
  if (ops.empty()) {
    throw std::invalid_argument("otlab::orthogonal_sum: at least one summand is required");
  }
  auto sp = std::make_shared<std::vector<LazyOperator>>(std::move(ops));
  const int n = static_cast<int>(sp->size());
  double nb = 0.0;
  for (const auto& op : *sp) nb = std::max(nb, op.norm_bound);

  auto retag = [](FinVec img, std::int32_t space) {
    FinVec out;
    for (const auto& [v, c] : img.entries()) {
      if (v.space != 0) {
        throw std::runtime_error("otlab::orthogonal_sum: nested sums are not supported");
      }
      BasisIndex w = v;
      w.space = space;
      out.add(w, c);
    }
    return out;
  };

  LazyOperator T;
  std::ostringstream os;
  os << "orthogonal sum of " << n << " summands";
  T.description = os.str();
  T.norm_bound = nb;
  T.accepts = [sp, n](const BasisIndex& u) {
    if (u.space < 0 || u.space >= n) return false;
    const auto& op = (*sp)[u.space];
    if (!op.accepts) return true;
    BasisIndex nu = u;
    nu.space = 0;
    return op.accepts(nu);
  };
  T.apply_basis = [sp, retag](const BasisIndex& u) {
    BasisIndex nu = u;
    nu.space = 0;
    return retag((*sp)[u.space].apply_basis(nu), u.space);
  };
  T.adjoint_basis = [sp, n, retag](const BasisIndex& u) {
    if (u.space < 0 || u.space >= n) {
      throw std::invalid_argument("otlab::orthogonal_sum: index outside the adjoint domain");
    }
    const auto& op = (*sp)[u.space];
    if (!op.adjoint_basis) {
      throw std::invalid_argument("otlab::orthogonal_sum: a summand has no adjoint action");
    }
    BasisIndex nu = u;
    nu.space = 0;
    return retag(op.adjoint_basis(nu), u.space);
  };
  T.diag_limit = [sp, n](const BasisIndex& u) -> std::optional<double> {
    if (u.space < 0 || u.space >= n) return std::nullopt;
    const auto& op = (*sp)[u.space];
    if (!op.diag_limit) return std::nullopt;
    BasisIndex nu = u;
    nu.space = 0;
    return op.diag_limit(nu);
  };
  return T;
}

NormalFlagReport similar_to_normal_flag(const std::vector<double>& per_summand_inf,
                                        std::optional<double> family_limit) {
  NormalFlagReport rep;
  double inf = family_limit.value_or(kInf);
  if (family_limit && !(*family_limit >= 0.0)) {
    throw std::invalid_argument("otlab::similar_to_normal_flag: family limit must be nonnegative");
  }
  for (double v : per_summand_inf) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument("otlab::similar_to_normal_flag: infima must be nonnegative");
    }
    inf = std::min(inf, v);
  }
  if (per_summand_inf.empty() && !family_limit) {
    throw std::invalid_argument("otlab::similar_to_normal_flag: nothing to aggregate");
  }
  rep.inf_product = inf;
  rep.similar_to_normal = inf > 0.0;
  rep.detail = rep.similar_to_normal
                   ? "window products of every summand are bounded away from 0"
                   : "window products are not bounded away from 0 across the family";
  return rep;
}

BanachRangeReport banach_range_bounds(const std::function<double(long long)>& x, long long K,
                                      int L_max, std::vector<long long> checkpoints) {
  if (!x) {
    throw std::invalid_argument("otlab::banach_range_bounds: sequence callback is required");
  }
  if (K < 1 || K > 100000000LL) {
    throw std::invalid_argument("otlab::banach_range_bounds: start horizon out of range");
  }
  if (L_max < 1 || L_max > 1024) {
    throw std::invalid_argument("otlab::banach_range_bounds: window length out of range");
  }
  if (K * static_cast<long long>(L_max) > 400000000LL) {
    throw std::invalid_argument("otlab::banach_range_bounds: scan budget exceeded");
  }
  BanachRangeReport rep;

  std::vector<long long> targets;
  for (long long n = 1; n <= K; n *= 2) targets.push_back(n);
  targets.push_back(K);
  for (long long n : checkpoints) {
    if (n < 1) {
      throw std::invalid_argument("otlab::banach_range_bounds: checkpoints must be positive");
    }
    targets.push_back(n);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  {
    double sum = 0.0;
    std::size_t t = 0;
    long long n_top = targets.back();
    for (long long n = 1; n <= n_top && t < targets.size(); ++n) {
      sum += x(n);
      if (n == targets[t]) {
        rep.cesaro.emplace_back(n, sum / static_cast<double>(n));
        ++t;
      }
    }
  }

  {
    std::vector<double> ring(static_cast<std::size_t>(L_max) + 1, 0.0);
    std::vector<double> wsum(static_cast<std::size_t>(L_max) + 1, 0.0);
    rep.windows.assign(L_max, WindowExtremum{});
    for (int L = 1; L <= L_max; ++L) {
      rep.windows[L - 1].length = L;
      rep.windows[L - 1].min_avg = kInf;
      rep.windows[L - 1].max_avg = -kInf;
    }
    long long j_top = K + L_max - 1;
    for (long long j = 1; j <= j_top; ++j) {
      double v = x(j);
      for (int L = L_max; L >= 1; --L) {
        double leaving = 0.0;
        if (j - L >= 1) leaving = ring[(j - L) % (L_max + 1)];
        wsum[L] += v - leaving;
        long long start = j - L + 1;
        if (start >= 1 && start <= K) {
          double avg = wsum[L] / L;
          auto& w = rep.windows[L - 1];
          w.min_avg = std::min(w.min_avg, avg);
          w.max_avg = std::max(w.max_avg, avg);
        }
      }
      ring[j % (L_max + 1)] = v;
    }
  }

  std::ostringstream os;
  os << "window extrema over starts 1.." << K << "; evidence only, nothing asserted beyond the horizon";
  rep.note = os.str();
  return rep;
}

}  // namespace otlab
