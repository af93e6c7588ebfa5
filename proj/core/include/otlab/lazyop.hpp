#pragma once

#include "otlab/matkernel.hpp"
#include "otlab/weightgen.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace otlab {

// Basis label inside one operator's index universe. space tags the summand
// when operators are combined; mixing universes is a hard error, not coercion.
struct BasisIndex {
  enum class Tag : std::uint8_t { integer, natural, pair, tree };
  Tag tag = Tag::integer;
  std::int32_t space = 0;
  std::int64_t a = 0;
  std::int64_t b = 0;

  friend auto operator<=>(const BasisIndex&, const BasisIndex&) = default;

  static BasisIndex Int(std::int64_t i, std::int32_t space = 0) {
    return {Tag::integer, space, i, 0};
  }
  static BasisIndex Nat(std::int64_t i, std::int32_t space = 0) {
    return {Tag::natural, space, i, 0};
  }
  static BasisIndex Pair(std::int64_t i, std::int64_t j, std::int32_t space = 0) {
    return {Tag::pair, space, i, j};
  }
  static BasisIndex TreeV(std::int64_t packed, std::int64_t step, std::int32_t space = 0) {
    return {Tag::tree, space, packed, step};
  }
};

std::string to_string(const BasisIndex& u);

// Finitely supported vector. Canonical form: no stored zero entries.
class FinVec {
 public:
  using Map = std::map<BasisIndex, Complex>;

  FinVec() = default;
  static FinVec basis(const BasisIndex& u, Complex coeff = 1.0);

  void add(const BasisIndex& u, Complex coeff);  // accumulates, drops exact zeros
  Complex coeff(const BasisIndex& u) const;
  const Map& entries() const { return m_; }
  std::size_t support_size() const { return m_.size(); }
  bool empty() const { return m_.empty(); }

  double norm_sq() const;
  double norm() const;

  FinVec& operator+=(const FinVec& y);
  FinVec& operator-=(const FinVec& y);
  FinVec& operator*=(Complex s);

 private:
  Map m_;
};

FinVec operator+(FinVec x, const FinVec& y);
FinVec operator-(FinVec x, const FinVec& y);
FinVec operator*(Complex s, FinVec x);

// <x, y>, linear in the first argument.
Complex inner(const FinVec& x, const FinVec& y);

inline constexpr std::size_t kSupportCap = 1000000;

// Infinite-dimensional operator given by exact basis actions with finite
// support. diag_limit, when present, is the closed-form limit of the diagonal
// of T*^n T^n supplied by the builder; the generic iteration never uses it,
// which keeps the two routes independent.
struct LazyOperator {
  std::string description;
  double norm_bound = 1.0;
  std::function<FinVec(const BasisIndex&)> apply_basis;
  std::function<FinVec(const BasisIndex&)> adjoint_basis;
  // Forward domain only; maps between different spaces have another adjoint
  // domain, so adjoint_basis validates its own inputs. null: accept every index.
  std::function<bool(const BasisIndex&)> accepts;
  std::function<std::optional<double>(const BasisIndex&)> diag_limit;  // may be null
};

FinVec apply(const LazyOperator& T, const FinVec& x, std::size_t cap = kSupportCap);
FinVec apply_adjoint(const LazyOperator& T, const FinVec& x, std::size_t cap = kSupportCap);
FinVec apply_power(const LazyOperator& T, FinVec x, long long n, std::size_t cap = kSupportCap);

struct AsymptoticValue {
  double value = 0.0;  // equals hi on the bracketed route
  double lo = 0.0;
  double hi = 0.0;
  enum class Route { closed_form, bracketed } route = Route::closed_form;
  long long n_used = 0;
  std::string note;
};

// lim_n <T*^n T^n e_u, e_u> for operators whose iterates are diagonal on the
// given basis. Closed form via the builder oracle when present; otherwise the
// monotone decreasing diagonal is iterated until Cauchy and bracketed.
AsymptoticValue asymptotic_diag_value(const LazyOperator& T, const BasisIndex& u,
                                      long long n_max = 100000, double cauchy_tol = 1e-10);

// Operator-weighted unilateral shift with block action A_{j+1}^{-1/2} A_j^{1/2}
// on blocks j >= 1, each block of the given dimension. Basis: Pair(j, s).
// Preconditions (A_1 invertible, r(A_j) <= rmin(A_{j+1}), r(A_j) -> 1) are
// checked on blocks j <= j_check.
LazyOperator build_block_unishift(std::function<CMatrix(long long)> block, int dim,
                                  long long j_check = 64);

// Diagonal-cluster unilateral shift: the values of lambda (positive,
// nondecreasing, limit 1) are arranged along antidiagonals into alpha_{l,m},
// and T e_{l,m} = sqrt(alpha_{l,m} / alpha_{l,m+1}) e_{l,m+1}. Basis: Pair(l, m).
LazyOperator build_diag_cluster_shift(const WeightGen& lambda);

// alpha_{l,m} of the antidiagonal arrangement; l, m >= 1.
double diag_cluster_alpha(const WeightGen& lambda, long long l, long long m);

// Level-conjugated bilateral operator A^{-1/2} U A^{1/2}: level k (of the
// given dimension) carries the PSD block level(k), transfer(k) is the unitary
// level-k -> level-k+1 block of U (null: identity). Basis: Pair(k, s).
LazyOperator build_conjugated_bilateral(std::function<CMatrix(long long)> level, int dim,
                                        std::function<CMatrix(long long)> transfer = nullptr,
                                        long long k_check = 48);

// Scalar-level preset: a_k = 1 - 2^{-k-1} for k >= 0, a_k = 1/4 + 2^{k-2} for
// k < 0. A bilateral weighted shift with weights sqrt(a_k / a_{k+1}).
LazyOperator conjugated_bilateral_preset();
double conjugated_bilateral_preset_level(long long k);

struct BilateralSimilarityReport {
  double window_sup = 0.0;  // sup over all windows prod |w_{k+j}|, may be +inf
  double window_inf = 0.0;  // inf over all windows, may be 0
  bool power_bounded = false;       // window_sup finite
  bool similar_to_unitary = false;  // additionally window_inf > 0
  std::string detail;
};

// Exact window-product extrema for generators whose structure admits them
// (eventually constant both ways, telescoping tail, exp_inv_square,
// run_indicator). Unsupported kinds are an error, never an approximation.
BilateralSimilarityReport bilateral_similarity_report(const WeightGen& w);

// Blockwise orthogonal sum. Summand i only sees indices with space == i; its
// own actions run in its native space and are retagged on the way out.
LazyOperator orthogonal_sum(std::vector<LazyOperator> ops);

struct NormalFlagReport {
  bool similar_to_normal = false;
  double inf_product = 0.0;  // inf over summands of the per-summand window inf
  std::string detail;
};

// Similarity of a shift sum to a normal operator needs the per-summand inf
// window products bounded away from 0; family_limit carries the declared
// infimum of an infinite family.
NormalFlagReport similar_to_normal_flag(const std::vector<double>& per_summand_inf,
                                        std::optional<double> family_limit = std::nullopt);

struct WindowExtremum {
  int length = 0;
  double min_avg = 0.0;
  double max_avg = 0.0;
};

struct BanachRangeReport {
  std::vector<std::pair<long long, double>> cesaro;  // (n, mean of x_1..x_n)
  std::vector<WindowExtremum> windows;               // per window length
  std::string note;
};

// Evidence report for the reachable-limit range of a bounded sequence:
// Cesaro means at doubling checkpoints (plus the supplied ones) and exact
// window-average extrema for every length <= L_max over starts <= K.
// Evidence only; nothing is asserted beyond the tested horizon.
BanachRangeReport banach_range_bounds(const std::function<double(long long)>& x, long long K,
                                      int L_max, std::vector<long long> checkpoints = {});

}  // namespace otlab
