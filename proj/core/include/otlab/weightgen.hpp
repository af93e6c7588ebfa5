#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace otlab {

// Positive weight (or scalar sequence) families with closed-form or certified
// tail products. The tail oracle is the exactness mechanism: asymptotic values
// are never obtained by blind truncation of an infinite product.
struct WeightGen {
  enum class Kind {
    constant,             // w_j = c
    table_then_constant,  // finite table, value c above it, left_c below it
    telescoping,          // w_j = sqrt(j^2 - 1) / j, defined for j >= max(2, j0)
    geometric,            // w_j = c^j, j >= 0
    run_indicator,        // value c on [b^l, b^l + l) for l >= 1, else 1
    exp_inv_square,       // w_j = exp(-1 / (|j| + 1)^2), j in Z
    custom,               // finite table, 1 elsewhere, optional declared tail
  };
  enum class Direction { forward, backward };

  Kind kind = Kind::constant;
  Direction direction = Direction::forward;
  double c = 1.0;       // constant value / tail constant / geometric ratio / run value
  long long j0 = 2;     // telescoping start index
  long long base = 3;   // run_indicator base b
  std::map<long long, double> table;     // table_then_constant prefix, custom table
  std::optional<double> left_c;          // table_then_constant value below the table
  std::optional<double> declared_tail;   // custom: product over indices above the table

  double weight(long long j) const;

  // Product over [i, +inf). Exact closed form or certified tail sum.
  // May be 0 or +inf; nullopt only for custom generators with no declared tail.
  std::optional<double> tail_product(long long i) const;

  // Product over [i, N], evaluated by loop.
  double partial_product(long long i, long long N) const;

  // sup of w_j over j >= i (as a supremum, not necessarily attained).
  double sup_from(long long i) const;
  double sup_weight() const;

  std::string describe() const;

  static WeightGen constant_gen(double c);
  static WeightGen table_then_constant_gen(std::map<long long, double> table, double tail,
                                           std::optional<double> left = std::nullopt);
  static WeightGen telescoping_gen(long long j0 = 2);
  static WeightGen geometric_gen(double ratio);
  static WeightGen run_indicator_gen(long long base, double value);
  static WeightGen exp_inv_square_gen();
  static WeightGen custom_gen(std::map<long long, double> table,
                              std::optional<double> declared_tail = std::nullopt);
};

// Closed form for the telescoping family: product of w_j^2 over j in [i, N]
// equals (i-1)(N+1) / (i N) for 2 <= i <= N.
double telescoped_partial_sq(long long i, long long N);

// Certified tail sum: sum of 1/m^2 over m >= N+1, error below 1e-3 / N^5.
double inv_square_tail_sum(long long N);

}  // namespace otlab
