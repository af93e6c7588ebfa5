#include "otlab/registry.hpp"

#include <cmath>
#include <stdexcept>

namespace otlab {

namespace {

// sqrt(j^2 - 1) / j, the telescoping weight; j >= 2.
double tele(long long j) {
  double d = static_cast<double>(j);
  return std::sqrt(d * d - 1.0) / d;
}

bool nat_index(const BasisIndex& u) {
  return u.tag == BasisIndex::Tag::natural && u.space == 0 && u.a >= 1;
}

bool grid_index(const BasisIndex& u) {
  return u.tag == BasisIndex::Tag::pair && u.space == 0 && u.a >= 1 && u.b >= 1;
}

void check_nat(const BasisIndex& u, const char* who) {
  if (!nat_index(u)) {
    throw std::invalid_argument(std::string(who) + ": index outside the adjoint domain");
  }
}

void check_grid(const BasisIndex& u, const char* who) {
  if (!grid_index(u)) {
    throw std::invalid_argument(std::string(who) + ": index outside the adjoint domain");
  }
}

OperatorSet make_shift_multiplicity() {
  OperatorSet set;
  set.description =
      "bilateral weighted shift, weight 1 to the right of 0 and 1/2 at and left of 0; "
      "the asymptotic diagonal jumps across the seam";
  LazyOperator T;
  T.description = "bilateral weighted shift with a one-sided defect";
  T.norm_bound = 1.0;
  auto w = [](long long k) { return k > 0 ? 1.0 : 0.5; };
  T.accepts = [](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::integer && u.space == 0;
  };
  T.apply_basis = [w](const BasisIndex& u) {
    return FinVec::basis(BasisIndex::Int(u.a + 1), w(u.a));
  };
  T.adjoint_basis = [w](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::integer || u.space != 0) {
      throw std::invalid_argument("shift_multiplicity: index outside the adjoint domain");
    }
    return FinVec::basis(BasisIndex::Int(u.a - 1), w(u.a - 1));
  };
  // Right of 0 the orbit never sees the defect; at k <= 0 exactly -2k+2
  // halvings happen before the orbit escapes.
  T.diag_limit = [](const BasisIndex& u) -> std::optional<double> {
    if (u.a > 0) return 1.0;
    return std::ldexp(1.0, static_cast<int>(2 * u.a - 2));
  };
  set.ops.emplace("T", std::move(T));
  return set;
}

OperatorSet make_coincidence_pair() {
  OperatorSet set;
  set.description =
      "two non-commuting weighted shifts on a doubly indexed basis with the same "
      "asymptotic diagonal; the product breaks the coincidence on the first column";

  LazyOperator T1;
  T1.description = "columnwise telescoping shift";
  T1.norm_bound = 1.0;
  T1.accepts = grid_index;
  T1.apply_basis = [](const BasisIndex& u) {
    double w = u.b == 1 ? 1.0 : tele(u.b);
    return FinVec::basis(BasisIndex::Pair(u.a, u.b + 1), w);
  };
  T1.adjoint_basis = [](const BasisIndex& u) {
    check_grid(u, "coincidence_pair T1");
    if (u.b == 1) return FinVec{};
    double w = u.b == 2 ? 1.0 : tele(u.b - 1);
    return FinVec::basis(BasisIndex::Pair(u.a, u.b - 1), w);
  };
  T1.diag_limit = [](const BasisIndex& u) -> std::optional<double> {
    return u.b == 1 ? 0.5 : static_cast<double>(u.b - 1) / static_cast<double>(u.b);
  };

  LazyOperator T2;
  T2.description = "row-hopping shift with the same asymptotic diagonal";
  T2.norm_bound = 1.0;
  T2.accepts = grid_index;
  T2.apply_basis = [](const BasisIndex& u) {
    long long i = u.a, j = u.b;
    if (i == 1 && j == 1) return FinVec::basis(BasisIndex::Pair(1, 2), 1.0);
    if (j == 2) return FinVec::basis(BasisIndex::Pair(i + 1, 1), 1.0);
    if (j == 1) return FinVec::basis(BasisIndex::Pair(i - 1, 3), std::sqrt(3.0) / 2.0);
    return FinVec::basis(BasisIndex::Pair(i, j + 1), tele(j));
  };
  T2.adjoint_basis = [](const BasisIndex& u) {
    check_grid(u, "coincidence_pair T2");
    long long a = u.a, b = u.b;
    if (a == 1 && b == 1) return FinVec{};
    if (a == 1 && b == 2) return FinVec::basis(BasisIndex::Pair(1, 1), 1.0);
    if (b == 1) return FinVec::basis(BasisIndex::Pair(a - 1, 2), 1.0);
    if (b == 2) return FinVec{};
    if (b == 3) return FinVec::basis(BasisIndex::Pair(a + 1, 1), std::sqrt(3.0) / 2.0);
    return FinVec::basis(BasisIndex::Pair(a, b - 1), tele(b - 1));
  };
  T2.diag_limit = [](const BasisIndex& u) -> std::optional<double> {
    return u.b == 1 ? 0.5 : static_cast<double>(u.b - 1) / static_cast<double>(u.b);
  };

  LazyOperator P;
  P.description = "product of the pair";
  P.norm_bound = 1.0;
  P.accepts = grid_index;
  P.apply_basis = [](const BasisIndex& u) {
    long long i = u.a, j = u.b;
    if (j == 1) return FinVec::basis(BasisIndex::Pair(i + 1, 1), 1.0);
    return FinVec::basis(BasisIndex::Pair(i, j + 2), tele(j) * tele(j + 1));
  };
  P.adjoint_basis = [](const BasisIndex& u) {
    check_grid(u, "coincidence_pair T2T1");
    long long a = u.a, b = u.b;
    if (b == 1) {
      if (a == 1) return FinVec{};
      return FinVec::basis(BasisIndex::Pair(a - 1, 1), 1.0);
    }
    if (b <= 3) return FinVec{};
    return FinVec::basis(BasisIndex::Pair(a, b - 2), tele(b - 2) * tele(b - 1));
  };
  P.diag_limit = [](const BasisIndex& u) -> std::optional<double> {
    return u.b == 1 ? 1.0 : static_cast<double>(u.b - 1) / static_cast<double>(u.b);
  };

  set.ops.emplace("T1", std::move(T1));
  set.ops.emplace("T2", std::move(T2));
  set.ops.emplace("T2T1", std::move(P));
  return set;
}

OperatorSet make_stable_product_pair() {
  OperatorSet set;
  set.description =
      "two stable shifts on a doubly indexed basis whose product has a nonzero "
      "asymptotic diagonal depending on the row only";

  LazyOperator T1;
  T1.description = "columnwise shift with row-telescoping weights";
  T1.norm_bound = 1.0;
  T1.accepts = grid_index;
  T1.apply_basis = [](const BasisIndex& u) {
    return FinVec::basis(BasisIndex::Pair(u.a, u.b + 1), tele(u.a + 1));
  };
  T1.adjoint_basis = [](const BasisIndex& u) {
    check_grid(u, "stable_product_pair T1");
    if (u.b == 1) return FinVec{};
    return FinVec::basis(BasisIndex::Pair(u.a, u.b - 1), tele(u.a + 1));
  };
  T1.diag_limit = [](const BasisIndex&) -> std::optional<double> { return 0.0; };

  LazyOperator T2;
  T2.description = "diagonal hop, annihilating the first column";
  T2.norm_bound = 1.0;
  T2.accepts = grid_index;
  T2.apply_basis = [](const BasisIndex& u) {
    if (u.b == 1) return FinVec{};
    return FinVec::basis(BasisIndex::Pair(u.a + 1, u.b - 1), 1.0);
  };
  T2.adjoint_basis = [](const BasisIndex& u) {
    check_grid(u, "stable_product_pair T2");
    if (u.a == 1) return FinVec{};
    return FinVec::basis(BasisIndex::Pair(u.a - 1, u.b + 1), 1.0);
  };
  T2.diag_limit = [](const BasisIndex&) -> std::optional<double> { return 0.0; };

  LazyOperator P;
  P.description = "product of the pair, a pure row shift";
  P.norm_bound = 1.0;
  P.accepts = grid_index;
  P.apply_basis = [](const BasisIndex& u) {
    return FinVec::basis(BasisIndex::Pair(u.a + 1, u.b), tele(u.a + 1));
  };
  P.adjoint_basis = [](const BasisIndex& u) {
    check_grid(u, "stable_product_pair T2T1");
    if (u.a == 1) return FinVec{};
    return FinVec::basis(BasisIndex::Pair(u.a - 1, u.b), tele(u.a));
  };
  P.diag_limit = [](const BasisIndex& u) -> std::optional<double> {
    return static_cast<double>(u.a) / static_cast<double>(u.a + 1);
  };

  set.ops.emplace("T1", std::move(T1));
  set.ops.emplace("T2", std::move(T2));
  set.ops.emplace("T2T1", std::move(P));
  return set;
}

// Largest l with base^l <= j, plus the power itself; j >= 1.
struct PowerPos {
  long long l = 0;
  long long p = 1;
};

PowerPos power_floor(long long base, long long j) {
  PowerPos out;
  while (out.p <= j / base) {
    out.p *= base;
    ++out.l;
  }
  return out;
}

// Weight rule: sqrt(2) when j is a power of 3 (at least 3), sqrt(1/2) when
// j = 3^l + l with l >= 1. The two spike sets never meet.
double banach_dependent_weight(long long j) {
  PowerPos pos = power_floor(3, j);
  if (pos.l == 0) return 1.0;
  if (pos.p == j) return std::sqrt(2.0);
  if (j == pos.p + pos.l) return std::sqrt(0.5);
  return 1.0;
}

// Weight rule: sqrt(2) at 3^l, sqrt(1/2) at 2 * 3^l, l >= 1.
double no_cesaro_weight(long long j) {
  PowerPos pos = power_floor(3, j);
  if (pos.l == 0) return 1.0;
  if (pos.p == j) return std::sqrt(2.0);
  if (j == 2 * pos.p) return std::sqrt(0.5);
  return 1.0;
}

// Weight rule: sqrt(2) on the runs [3^l, 3^l + l), 1 elsewhere. Unreleased
// spikes pile up, so powers grow like 2^{n/2}.
double not_power_bounded_weight(long long j) {
  PowerPos pos = power_floor(3, j);
  return j - pos.p < pos.l ? std::sqrt(2.0) : 1.0;
}

OperatorSet make_unilateral(const char* id, const char* blurb, double (*w)(long long)) {
  OperatorSet set;
  set.description = blurb;
  LazyOperator T;
  T.description = std::string("unilateral weighted shift, ") + id;
  T.norm_bound = std::sqrt(2.0);
  T.accepts = nat_index;
  T.apply_basis = [w](const BasisIndex& u) {
    return FinVec::basis(BasisIndex::Nat(u.a + 1), w(u.a));
  };
  T.adjoint_basis = [w](const BasisIndex& u) {
    check_nat(u, "unilateral shift");
    if (u.a == 1) return FinVec{};
    return FinVec::basis(BasisIndex::Nat(u.a - 1), w(u.a - 1));
  };
  set.ops.emplace("T", std::move(T));
  return set;
}

OperatorSet make_counterexample_triangle() {
  OperatorSet set;
  set.description =
      "upper-triangular contraction with a stable corner and a one-dimensional "
      "coupling; the commutant of the whole maps into the stable corner nontrivially";

  auto t00w = [](long long j) { return 1.0 / static_cast<double>(j + 2); };

  bool (*e_index)(const BasisIndex&) = [](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::natural && u.space == 0 && u.a >= 1;
  };
  bool (*f_index)(const BasisIndex&) = [](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::pair && u.space == 1 && u.a >= 1;
  };

  LazyOperator T00;
  T00.description = "stable-corner weighted shift";
  T00.norm_bound = 1.0 / 3.0;
  T00.accepts = e_index;
  T00.apply_basis = [t00w](const BasisIndex& u) {
    return FinVec::basis(BasisIndex::Nat(u.a + 1), t00w(u.a));
  };
  T00.adjoint_basis = [t00w, e_index, f_index](const BasisIndex& u) {
    if (f_index(u)) return FinVec{};
    if (!e_index(u)) {
      throw std::invalid_argument("counterexample T00: index outside the adjoint domain");
    }
    if (u.a == 1) return FinVec{};
    return FinVec::basis(BasisIndex::Nat(u.a - 1), t00w(u.a - 1));
  };
  T00.diag_limit = [](const BasisIndex&) -> std::optional<double> { return 0.0; };

  LazyOperator T11;
  T11.description = "row family of shifts returning through a weighted gate";
  T11.norm_bound = 1.0;
  T11.accepts = f_index;
  T11.apply_basis = [t00w](const BasisIndex& u) {
    if (u.b == 0) return FinVec::basis(BasisIndex::Pair(u.a, 1, 1), t00w(u.a));
    return FinVec::basis(BasisIndex::Pair(u.a, u.b + 1, 1), 1.0);
  };
  T11.adjoint_basis = [t00w, e_index, f_index](const BasisIndex& u) {
    if (e_index(u)) return FinVec{};
    if (!f_index(u)) {
      throw std::invalid_argument("counterexample T11: index outside the adjoint domain");
    }
    if (u.b == 1) return FinVec::basis(BasisIndex::Pair(u.a, 0, 1), t00w(u.a));
    if (u.b == 0) return FinVec::basis(BasisIndex::Pair(u.a, -1, 1), 1.0);
    return FinVec::basis(BasisIndex::Pair(u.a, u.b - 1, 1), 1.0);
  };

  LazyOperator V;
  V.description = "row-collapse map onto the stable corner";
  V.norm_bound = 1.0;
  V.accepts = f_index;
  V.apply_basis = [](const BasisIndex& u) {
    if (u.b != 0) return FinVec{};
    return FinVec::basis(BasisIndex::Nat(u.a), 1.0);
  };
  V.adjoint_basis = [e_index, f_index](const BasisIndex& u) {
    if (f_index(u)) return FinVec{};
    if (!e_index(u)) {
      throw std::invalid_argument("counterexample V: index outside the adjoint domain");
    }
    return FinVec::basis(BasisIndex::Pair(u.a, 0, 1), 1.0);
  };

  LazyOperator T01;
  T01.description = "coupling block, half the row collapse";
  T01.norm_bound = 0.5;
  T01.accepts = f_index;
  T01.apply_basis = [](const BasisIndex& u) {
    if (u.b != 0) return FinVec{};
    return FinVec::basis(BasisIndex::Nat(u.a), 0.5);
  };
  T01.adjoint_basis = [e_index, f_index](const BasisIndex& u) {
    if (f_index(u)) return FinVec{};
    if (!e_index(u)) {
      throw std::invalid_argument("counterexample T01: index outside the adjoint domain");
    }
    return FinVec::basis(BasisIndex::Pair(u.a, 0, 1), 0.5);
  };

  // Y f_{j,i} = e_{j+1} for i = 1 and (prod_{k=j+3}^{j+i+1} 1/k) e_{j+i} for
  // i >= 2, zero for i <= 0. The product accumulates ascending so the
  // intertwining residual cancels exactly.
  auto yprod = [](long long j, long long i) {
    double p = 1.0;
    for (long long k = j + 3; k <= j + i + 1; ++k) p *= 1.0 / static_cast<double>(k);
    return p;
  };

  LazyOperator Y;
  Y.description = "intertwining witness between the row family and the stable corner";
  Y.norm_bound = std::sqrt(2.0);
  Y.accepts = f_index;
  Y.apply_basis = [yprod](const BasisIndex& u) {
    long long j = u.a, i = u.b;
    if (i <= 0) return FinVec{};
    if (i == 1) return FinVec::basis(BasisIndex::Nat(j + 1), 1.0);
    return FinVec::basis(BasisIndex::Nat(j + i), yprod(j, i));
  };
  Y.adjoint_basis = [yprod, e_index, f_index](const BasisIndex& u) {
    if (f_index(u)) return FinVec{};
    if (!e_index(u)) {
      throw std::invalid_argument("counterexample Y: index outside the adjoint domain");
    }
    long long m = u.a;
    FinVec out;
    if (m >= 2) out.add(BasisIndex::Pair(m - 1, 1, 1), 1.0);
    for (long long i = 2; i < m; ++i) out.add(BasisIndex::Pair(m - i, i, 1), yprod(m - i, i));
    return out;
  };

  LazyOperator T;
  T.description = "assembled upper-triangular contraction";
  T.norm_bound = 1.0;
  T.accepts = [e_index, f_index](const BasisIndex& u) { return e_index(u) || f_index(u); };
  T.apply_basis = [t00w](const BasisIndex& u) {
    if (u.tag == BasisIndex::Tag::natural) {
      return FinVec::basis(BasisIndex::Nat(u.a + 1), t00w(u.a));
    }
    FinVec out;
    if (u.b == 0) {
      out.add(BasisIndex::Pair(u.a, 1, 1), t00w(u.a));
      out.add(BasisIndex::Nat(u.a), 0.5);
    } else {
      out.add(BasisIndex::Pair(u.a, u.b + 1, 1), 1.0);
    }
    return out;
  };
  T.adjoint_basis = [t00w, e_index, f_index](const BasisIndex& u) {
    if (e_index(u)) {
      FinVec out;
      if (u.a >= 2) out.add(BasisIndex::Nat(u.a - 1), t00w(u.a - 1));
      out.add(BasisIndex::Pair(u.a, 0, 1), 0.5);
      return out;
    }
    if (!f_index(u)) {
      throw std::invalid_argument("counterexample T: index outside the adjoint domain");
    }
    if (u.b == 1) return FinVec::basis(BasisIndex::Pair(u.a, 0, 1), t00w(u.a));
    if (u.b == 0) return FinVec::basis(BasisIndex::Pair(u.a, -1, 1), 1.0);
    return FinVec::basis(BasisIndex::Pair(u.a, u.b - 1, 1), 1.0);
  };

  set.ops.emplace("T00", std::move(T00));
  set.ops.emplace("T11", std::move(T11));
  set.ops.emplace("V", std::move(V));
  set.ops.emplace("T01", std::move(T01));
  set.ops.emplace("Y", std::move(Y));
  set.ops.emplace("T", std::move(T));
  return set;
}

}  // namespace

OperatorSet example_registry(const std::string& name) {
  if (name == "ch1_shift_multiplicity") return make_shift_multiplicity();
  if (name == "ch2_coincidence_pair") return make_coincidence_pair();
  if (name == "ch2_stable_product_pair") return make_stable_product_pair();
  if (name == "ch3_banach_dependent") {
    return make_unilateral("double and release",
                           "unilateral shift whose asymptotic diagonal depends on the "
                           "choice of generalized limit; the full reachable range is [1, 2]",
                           &banach_dependent_weight);
  }
  if (name == "ch3_no_cesaro") {
    return make_unilateral("double and hold a third",
                           "power-bounded unilateral shift whose diagonal means oscillate; "
                           "no averaged limit exists",
                           &no_cesaro_weight);
  }
  if (name == "ch3_not_power_bounded") {
    return make_unilateral("unreleased doubling runs",
                           "unilateral shift with growing doubling runs; powers grow like "
                           "2^{n/2} and no similarity can bound them",
                           &not_power_bounded_weight);
  }
  if (name == "ch5_counterexample") return make_counterexample_triangle();
  throw std::invalid_argument("otlab::example_registry: unknown scenario id: " + name);
}

std::vector<std::string> example_registry_names() {
  return {"ch1_shift_multiplicity", "ch2_coincidence_pair", "ch2_stable_product_pair",
          "ch3_banach_dependent",   "ch3_no_cesaro",        "ch3_not_power_bounded",
          "ch5_counterexample"};
}

}  // namespace otlab
