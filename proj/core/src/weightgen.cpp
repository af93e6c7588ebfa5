#include "otlab/weightgen.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace otlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("otlab::WeightGen: ") + what + " must be positive and finite");
  }
}

long long telescoping_start(const WeightGen& g) { return std::max<long long>(2, g.j0); }

// l >= 1 with b^l <= j < b^l + l, or 0 when j misses every run.
long long run_length_at(long long base, long long j) {
  long long p = base;
  long long l = 1;
  while (p <= j) {
    if (j - p < l) return l;
    if (p > j / base) break;
    p *= base;
    ++l;
  }
  return 0;
}

}  // namespace

double WeightGen::weight(long long j) const {
  switch (kind) {
    case Kind::constant:
      return c;
    case Kind::table_then_constant: {
      auto it = table.find(j);
      if (it != table.end()) return it->second;
      if (left_c && !table.empty() && j < table.begin()->first) return *left_c;
      return c;
    }
    case Kind::telescoping: {
      if (j < telescoping_start(*this)) {
        throw std::invalid_argument("otlab::WeightGen::weight: telescoping weight undefined below its start index");
      }
      double x = static_cast<double>(j);
      return std::sqrt(x * x - 1.0) / x;
    }
    case Kind::geometric: {
      if (j < 0) {
        throw std::invalid_argument("otlab::WeightGen::weight: geometric weight undefined for negative index");
      }
      return std::pow(c, static_cast<double>(j));
    }
    case Kind::run_indicator:
      return run_length_at(base, j) > 0 ? c : 1.0;
    case Kind::exp_inv_square: {
      double m = static_cast<double>(std::llabs(j)) + 1.0;
      return std::exp(-1.0 / (m * m));
    }
    case Kind::custom: {
      auto it = table.find(j);
      return it != table.end() ? it->second : 1.0;
    }
  }
  throw std::logic_error("otlab::WeightGen::weight: bad kind");
}

std::optional<double> WeightGen::tail_product(long long i) const {
  switch (kind) {
    case Kind::constant:
      if (c == 1.0) return 1.0;
      return c < 1.0 ? 0.0 : kInf;
    case Kind::table_then_constant: {
      if (c != 1.0) return c < 1.0 ? 0.0 : kInf;
      double p = 1.0;
      for (const auto& [k, v] : table) {
        if (k >= i) p *= v;
      }
      if (left_c && *left_c != 1.0 && !table.empty()) {
        long long m0 = table.begin()->first;
        if (i < m0) p *= std::pow(*left_c, static_cast<double>(m0 - i));
      }
      return p;
    }
    case Kind::telescoping: {
      if (i < telescoping_start(*this)) {
        throw std::invalid_argument("otlab::WeightGen::tail_product: telescoping tail undefined below its start index");
      }
      return std::sqrt(static_cast<double>(i - 1) / static_cast<double>(i));
    }
    case Kind::geometric:
      if (i < 0) {
        throw std::invalid_argument("otlab::WeightGen::tail_product: geometric tail undefined for negative index");
      }
      if (c == 1.0) return 1.0;
      return c < 1.0 ? 0.0 : kInf;
    case Kind::run_indicator:
      if (c == 1.0) return 1.0;
      return c < 1.0 ? 0.0 : kInf;
    case Kind::exp_inv_square: {
      double s = 0.0;
      if (i >= 0) {
        s = inv_square_tail_sum(i);
      } else {
        if (i < -1000000) {
          throw std::invalid_argument("otlab::WeightGen::tail_product: index too far left");
        }
        for (long long j = -1; j >= i; --j) {
          double m = static_cast<double>(-j) + 1.0;
          s += 1.0 / (m * m);
        }
        s += inv_square_tail_sum(0);
      }
      return std::exp(-s);
    }
    case Kind::custom: {
      if (!declared_tail) return std::nullopt;
      if (table.empty()) return *declared_tail;
      long long m1 = table.rbegin()->first;
      // Past the table the weights are pointwise 1, so only a declared unit
      // tail is consistent with a product statement there.
      if (i > m1 + 1) {
        if (*declared_tail == 1.0) return 1.0;
        return std::nullopt;
      }
      double p = 1.0;
      for (const auto& [k, v] : table) {
        if (k >= i) p *= v;
      }
      return p * *declared_tail;
    }
  }
  throw std::logic_error("otlab::WeightGen::tail_product: bad kind");
}

double WeightGen::partial_product(long long i, long long N) const {
  if (N < i) return 1.0;
  if (N - i > 100000000LL) {
    throw std::invalid_argument("otlab::WeightGen::partial_product: window too long");
  }
  double p = 1.0;
  for (long long j = i; j <= N; ++j) p *= weight(j);
  return p;
}

double WeightGen::sup_from(long long i) const {
  switch (kind) {
    case Kind::constant:
      return c;
    case Kind::table_then_constant: {
      double s = c;
      for (const auto& [k, v] : table) {
        if (k >= i) s = std::max(s, v);
      }
      if (left_c && !table.empty() && i < table.begin()->first) s = std::max(s, *left_c);
      return s;
    }
    case Kind::telescoping:
      return 1.0;
    case Kind::geometric: {
      if (c > 1.0) return kInf;
      if (c == 1.0) return 1.0;
      return std::pow(c, static_cast<double>(std::max<long long>(i, 0)));
    }
    case Kind::run_indicator:
      return std::max(1.0, c);
    case Kind::exp_inv_square:
      return 1.0;
    case Kind::custom: {
      double s = 1.0;
      for (const auto& [k, v] : table) {
        if (k >= i) s = std::max(s, v);
      }
      return s;
    }
  }
  throw std::logic_error("otlab::WeightGen::sup_from: bad kind");
}

double WeightGen::sup_weight() const {
  switch (kind) {
    case Kind::telescoping:
      return 1.0;
    case Kind::geometric:
      return sup_from(0);
    default:
      return sup_from(std::numeric_limits<long long>::min());
  }
}

std::string WeightGen::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::constant:
      os << "constant(" << c << ")";
      break;
    case Kind::table_then_constant:
      os << "table_then_constant(|table|=" << table.size() << ", c=" << c;
      if (left_c) os << ", left=" << *left_c;
      os << ")";
      break;
    case Kind::telescoping:
      os << "telescoping(j0=" << telescoping_start(*this) << ")";
      break;
    case Kind::geometric:
      os << "geometric(ratio=" << c << ")";
      break;
    case Kind::run_indicator:
      os << "run_indicator(base=" << base << ", value=" << c << ")";
      break;
    case Kind::exp_inv_square:
      os << "exp_inv_square";
      break;
    case Kind::custom:
      os << "custom(|table|=" << table.size();
      if (declared_tail) os << ", declared_tail=" << *declared_tail;
      os << ")";
      break;
  }
  if (direction == Direction::backward) os << " backward";
  return os.str();
}

WeightGen WeightGen::constant_gen(double c) {
  require_positive(c, "constant value");
  WeightGen g;
  g.kind = Kind::constant;
  g.c = c;
  return g;
}

WeightGen WeightGen::table_then_constant_gen(std::map<long long, double> table, double tail,
                                             std::optional<double> left) {
  require_positive(tail, "tail constant");
  for (const auto& [k, v] : table) require_positive(v, "table value");
  if (left) {
    require_positive(*left, "left constant");
    if (table.empty()) {
      throw std::invalid_argument("otlab::WeightGen: a left constant needs a nonempty table");
    }
  }
  WeightGen g;
  g.kind = Kind::table_then_constant;
  g.c = tail;
  g.table = std::move(table);
  g.left_c = left;
  return g;
}

WeightGen WeightGen::telescoping_gen(long long j0) {
  if (j0 < 2) {
    throw std::invalid_argument("otlab::WeightGen: telescoping start index must be at least 2");
  }
  WeightGen g;
  g.kind = Kind::telescoping;
  g.j0 = j0;
  return g;
}

WeightGen WeightGen::geometric_gen(double ratio) {
  require_positive(ratio, "ratio");
  WeightGen g;
  g.kind = Kind::geometric;
  g.c = ratio;
  return g;
}

WeightGen WeightGen::run_indicator_gen(long long base, double value) {
  if (base < 2) {
    throw std::invalid_argument("otlab::WeightGen: run indicator base must be at least 2");
  }
  require_positive(value, "run value");
  WeightGen g;
  g.kind = Kind::run_indicator;
  g.base = base;
  g.c = value;
  return g;
}

WeightGen WeightGen::exp_inv_square_gen() {
  WeightGen g;
  g.kind = Kind::exp_inv_square;
  return g;
}

WeightGen WeightGen::custom_gen(std::map<long long, double> table,
                                std::optional<double> declared_tail) {
  for (const auto& [k, v] : table) require_positive(v, "table value");
  if (declared_tail && (!(*declared_tail >= 0.0) || !std::isfinite(*declared_tail))) {
    throw std::invalid_argument("otlab::WeightGen: declared tail must be finite and nonnegative");
  }
  WeightGen g;
  g.kind = Kind::custom;
  g.table = std::move(table);
  g.declared_tail = declared_tail;
  return g;
}

double telescoped_partial_sq(long long i, long long N) {
  if (i < 2 || N < i) {
    throw std::invalid_argument("otlab::telescoped_partial_sq: need 2 <= i <= N");
  }
  return static_cast<double>(i - 1) * static_cast<double>(N + 1) /
         (static_cast<double>(i) * static_cast<double>(N));
}

double inv_square_tail_sum(long long N) {
  if (N < 0) {
    throw std::invalid_argument("otlab::inv_square_tail_sum: index must be nonnegative");
  }
  const long long N0 = std::max<long long>(N, 10000);
  double s = 0.0;
  for (long long m = N0; m > N; --m) {
    double x = static_cast<double>(m);
    s += 1.0 / (x * x);
  }
  double x = static_cast<double>(N0);
  s += 1.0 / x - 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x) - 1.0 / (30.0 * std::pow(x, 5));
  return s;
}

}  // namespace otlab
