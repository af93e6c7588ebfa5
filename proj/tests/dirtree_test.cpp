#include "otlab/dirtree.hpp"

#include "otlab/registry.hpp"
#include "otlab/weightgen.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

using namespace otlab;
using Catch::Approx;

namespace {

// Single core vertex, one hanging ray with a dyadic prefix, ancestor ray of
// constant 1/2. The shift is unitarily the bilateral prototype with weight
// 1/2 on the nonpositive side.
TreeShift bilateral_line() {
  DirectedTree::Tail tl;
  tl.attach = 0;
  tl.gen = WeightGen::table_then_constant_gen({{1, 0.5}}, 1.0);
  DirectedTree t = DirectedTree::build({"o"}, {-1}, {tl}, WeightGen::constant_gen(0.5));
  return TreeShift::build(std::move(t), {1.0});
}

// Rooted core a -> b -> {c, d}; c continues into a telescoping ray, d is a
// leaf. Not a contraction.
TreeShift rooted_chain() {
  DirectedTree::Tail tl;
  tl.attach = 2;
  tl.gen = WeightGen::telescoping_gen();
  tl.offset = 1;
  DirectedTree t = DirectedTree::build({"a", "b", "c", "d"}, {-1, 0, 1, 1}, {tl}, std::nullopt);
  return TreeShift::build(std::move(t), {1.0, 0.5, 0.8, 0.9});
}

// Rootless single vertex with no descendants: the adjoint side carries all
// the structure.
TreeShift backward_line() {
  DirectedTree t = DirectedTree::build({"o"}, {-1}, {},
                                       WeightGen::table_then_constant_gen({{0, 0.9}}, 1.0));
  return TreeShift::build(std::move(t), {1.0});
}

// Rootless line with both asymptote directions alive: dyadic hanging ray and
// an ancestor product of 0.9.
TreeShift dual_tail_line() {
  DirectedTree::Tail tl;
  tl.attach = 0;
  tl.gen = WeightGen::custom_gen({{1, 0.5}}, 1.0);
  DirectedTree t = DirectedTree::build({"o"}, {-1}, {tl},
                                       WeightGen::table_then_constant_gen({{0, 0.9}}, 1.0));
  return TreeShift::build(std::move(t), {1.0});
}

// Branch vertex with a length-3 and a length-2 finite chain, dyadic weights.
TreeShift two_leaf_tree() {
  DirectedTree t = DirectedTree::build({"b", "l1", "r1", "l2", "r2", "l3"}, {-1, 0, 0, 1, 2, 3},
                                       {}, WeightGen::table_then_constant_gen({{0, 0.5}}, 1.0));
  return TreeShift::build(std::move(t), {1.0, 0.5, 0.25, 0.5, 1.0, 0.5});
}

// Branch vertex with one leaf and one infinite dyadic ray.
TreeShift one_leaf_tree() {
  DirectedTree::Tail tl;
  tl.attach = 0;
  tl.gen = WeightGen::custom_gen({{1, 0.5}}, 1.0);
  DirectedTree t = DirectedTree::build({"b", "r"}, {-1, 0}, {tl},
                                       WeightGen::table_then_constant_gen({{0, 0.5}}, 1.0));
  return TreeShift::build(std::move(t), {1.0, 0.25});
}

// Leafless branch vertex: two infinite rays below one core vertex.
TreeShift leafless_pair(WeightGen first, WeightGen second) {
  DirectedTree::Tail t0;
  t0.attach = 0;
  t0.gen = std::move(first);
  DirectedTree::Tail t1;
  t1.attach = 0;
  t1.gen = std::move(second);
  DirectedTree t = DirectedTree::build({"b"}, {-1}, {t0, t1},
                                       WeightGen::table_then_constant_gen({{0, 0.5}}, 1.0));
  return TreeShift::build(std::move(t), {1.0});
}

void check_tree_pairing(const TreeShift& s, const std::vector<TreeVertex>& grid) {
  LazyOperator T = as_lazy_operator(s);
  for (const TreeVertex& u : grid) {
    for (const TreeVertex& v : grid) {
      Complex lhs = inner(T.apply_basis(tree_index(u)), FinVec::basis(tree_index(v)));
      Complex rhs = inner(FinVec::basis(tree_index(u)), T.adjoint_basis(tree_index(v)));
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

FinVec apply_backward(const std::function<double(int, long long)>& w, const FinVec& x) {
  FinVec out;
  for (const auto& [u, xi] : x.entries()) {
    if (u.b == 0) continue;
    out.add(BasisIndex::Pair(u.a, u.b - 1), xi * w(static_cast<int>(u.a), u.b - 1));
  }
  return out;
}

// Re-derives every certificate by actually shifting the vector down, rather
// than trusting the window products accumulated inside the construction.
void recheck_certificates(const std::function<double(int, long long)>& w,
                          const BackwardCyclicResult& res, int M) {
  FinVec cur = res.f;
  int m = 1;
  for (long long k = 0; m <= M; ++k) {
    if (k > static_cast<long long>(m) * (m + 1) / 2) ++m;
    if (m > M) break;
    BasisIndex anchor = BasisIndex::Pair(res.support_j[m - 1], res.support_k[m - 1] - k);
    double a = std::abs(cur.coeff(anchor));
    REQUIRE(a > 0.0);
    double others = cur.norm_sq() - a * a;
    if (k == 0 && res.zero_branch >= 0) {
      // The finite block's top vector only survives shift zero.
      double top = std::abs(cur.coeff(BasisIndex::Pair(res.zero_branch, res.zero_index)));
      others -= top * top;
    }
    CHECK(others <= a * a * std::ldexp(1.0, -m) * (1.0 + 1e-9));
    cur = apply_backward(w, cur);
  }
}

}  // namespace

TEST_CASE("tree vertices and their basis indices") {
  TreeVertex c = TreeVertex::Core(2);
  TreeVertex t = TreeVertex::Tail(0, 5);
  TreeVertex u = TreeVertex::Up(3);

  CHECK(to_string(c) != to_string(t));
  CHECK(to_string(t) != to_string(u));
  CHECK(to_string(c) != to_string(u));

  CHECK(tree_vertex(tree_index(c)) == c);
  CHECK(tree_vertex(tree_index(t)) == t);
  CHECK(tree_vertex(tree_index(u)) == u);
  CHECK(tree_index(c, 1).space == 1);
  CHECK_THROWS_AS(tree_vertex(BasisIndex::Nat(1)), std::invalid_argument);
}

TEST_CASE("tree construction rejects malformed input") {
  CHECK_THROWS_AS(DirectedTree::build({}, {}, {}, std::nullopt), std::invalid_argument);
  CHECK_THROWS_AS(DirectedTree::build({"a", "b"}, {-1, -1}, {}, std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(DirectedTree::build({"a", "b", "c"}, {-1, 2, 1}, {}, std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(DirectedTree::build({"a"}, {-1, 0}, {}, std::nullopt), std::invalid_argument);

  DirectedTree::Tail bad;
  bad.attach = 7;
  bad.gen = WeightGen::constant_gen(0.5);
  CHECK_THROWS_AS(DirectedTree::build({"a"}, {-1}, {bad}, std::nullopt), std::invalid_argument);

  SECTION("shift validation") {
    DirectedTree t = DirectedTree::build({"a", "b"}, {-1, 0}, {}, std::nullopt);
    CHECK_THROWS_AS(TreeShift::build(t, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TreeShift::build(t, {1.0, -0.5}), std::invalid_argument);

    DirectedTree::Tail no_oracle;
    no_oracle.attach = 1;
    no_oracle.gen = WeightGen::custom_gen({{1, 0.5}}, std::nullopt);
    DirectedTree t2 = DirectedTree::build({"a", "b"}, {-1, 0}, {no_oracle}, std::nullopt);
    CHECK_THROWS_AS(TreeShift::build(t2, {1.0, 0.5}), std::invalid_argument);
  }
}

TEST_CASE("navigation on the rooted chain") {
  TreeShift s = rooted_chain();
  const DirectedTree& t = s.tree;

  CHECK(t.rooted());
  CHECK(t.core_size() == 4);
  CHECK(tree_has_vertex(t, TreeVertex::Tail(0, 12)));
  CHECK_FALSE(tree_has_vertex(t, TreeVertex::Up(1)));
  CHECK_FALSE(tree_has_vertex(t, TreeVertex::Core(4)));

  CHECK_FALSE(tree_par(t, TreeVertex::Core(0)).has_value());
  CHECK(*tree_par(t, TreeVertex::Core(2)) == TreeVertex::Core(1));
  CHECK(*tree_par(t, TreeVertex::Tail(0, 1)) == TreeVertex::Core(2));
  CHECK(*tree_par(t, TreeVertex::Tail(0, 4)) == TreeVertex::Tail(0, 3));

  CHECK(tree_par_k(t, TreeVertex::Tail(0, 2), 3) == TreeVertex::Core(1));
  CHECK(tree_par_k(t, TreeVertex::Core(2), 0) == TreeVertex::Core(2));
  CHECK_THROWS_AS(tree_par_k(t, TreeVertex::Core(1), 5), std::invalid_argument);
  CHECK_THROWS_AS(tree_par_k(t, TreeVertex::Core(1), -1), std::invalid_argument);

  auto kids_b = tree_chi(t, TreeVertex::Core(1));
  REQUIRE(kids_b.size() == 2);
  auto kids_c = tree_chi(t, TreeVertex::Core(2));
  REQUIRE(kids_c.size() == 1);
  CHECK(kids_c[0] == TreeVertex::Tail(0, 1));
  CHECK(tree_chi(t, TreeVertex::Core(3)).empty());

  auto chi2 = tree_chi_n(t, TreeVertex::Core(1), 2);
  REQUIRE(chi2.size() == 1);
  CHECK(chi2[0] == TreeVertex::Tail(0, 1));

  auto gen1 = tree_gen_n(t, TreeVertex::Core(2), 1);
  CHECK(gen1.size() == 2);  // its own singleton plus the sibling leaf

  CHECK(tree_level(t, TreeVertex::Core(0)) == 0);
  CHECK(tree_level(t, TreeVertex::Core(3)) == 2);
  CHECK(tree_level(t, TreeVertex::Tail(0, 2)) == 4);
  CHECK(tree_level_set(t, 2).size() == 2);
  CHECK(tree_level_set(t, 4).size() == 1);
  CHECK(tree_level_set(t, -1).empty());

  CHECK(tree_is_leaf(t, TreeVertex::Core(3)));
  CHECK_FALSE(tree_is_leaf(t, TreeVertex::Core(2)));
  auto leaves = tree_leaves(t);
  REQUIRE(leaves.size() == 1);
  CHECK(leaves[0] == TreeVertex::Core(3));
  CHECK(branching_index(t) == 1);
  CHECK(corank(s) == 2);
}

TEST_CASE("shift action on the rooted chain") {
  TreeShift s = rooted_chain();

  CHECK(s.norm == Approx(std::sqrt(1.45)).epsilon(1e-12));
  CHECK_FALSE(s.contraction);
  CHECK(s.weight(TreeVertex::Core(1)) == 0.5);
  CHECK(s.weight(TreeVertex::Tail(0, 1)) == Approx(std::sqrt(3.0) / 2.0));
  CHECK_THROWS_AS(s.weight(TreeVertex::Core(0)), std::invalid_argument);

  FinVec tb = shift_apply(s, FinVec::basis(tree_index(TreeVertex::Core(1))));
  CHECK(tb.coeff(tree_index(TreeVertex::Core(2))).real() == 0.8);
  CHECK(tb.coeff(tree_index(TreeVertex::Core(3))).real() == 0.9);

  FinVec back = shift_apply_adjoint(s, FinVec::basis(tree_index(TreeVertex::Core(2))));
  CHECK(back.coeff(tree_index(TreeVertex::Core(1))).real() == 0.8);
  CHECK(shift_apply_adjoint(s, FinVec::basis(tree_index(TreeVertex::Core(0)))).empty());

  FinVec sq = shift_apply_power(s, FinVec::basis(tree_index(TreeVertex::Core(0))), 2);
  CHECK(sq.norm_sq() == Approx(0.25 * 1.45).epsilon(1e-12));
  CHECK_THROWS_AS(shift_apply_power(s, FinVec::basis(tree_index(TreeVertex::Core(0))), -1),
                  std::invalid_argument);

  LazyOperator T = as_lazy_operator(s);
  CHECK(T.accepts(tree_index(TreeVertex::Core(1))));
  CHECK_FALSE(T.accepts(BasisIndex::Nat(1)));
  CHECK_FALSE(T.accepts(tree_index(TreeVertex::Up(1))));
  check_tree_pairing(s, {TreeVertex::Core(0), TreeVertex::Core(1), TreeVertex::Core(2),
                         TreeVertex::Core(3), TreeVertex::Tail(0, 1), TreeVertex::Tail(0, 2)});
}

TEST_CASE("bilateral line tree reproduces the shift-multiplicity diagonal") {
  TreeShift s = bilateral_line();
  CHECK(s.norm == 1.0);
  CHECK(s.contraction);
  CHECK(corank(s) == 0);

  CHECK(tree_level(s.tree, TreeVertex::Up(3)) == -3);
  CHECK(tree_level(s.tree, TreeVertex::Tail(0, 2)) == 2);
  CHECK(tree_level_set(s.tree, -3).size() == 1);

  TreeAsymptotics a = analyze_asymptotics(s);
  CHECK(a.alpha(TreeVertex::Tail(0, 1)) == 1.0);
  CHECK(a.alpha(TreeVertex::Tail(0, 4)) == 1.0);
  CHECK(a.alpha(TreeVertex::Core(0)) == 0.25);
  CHECK(a.alpha(TreeVertex::Up(1)) == 0.0625);
  CHECK(a.alpha(TreeVertex::Up(2)) == 0.015625);
  CHECK(a.alpha_top == 0.25);
  CHECK(a.alpha_inf == 0.0);
  CHECK_FALSE(a.c0dot);
  CHECK(alpha(s, TreeVertex::Up(1)) == 0.0625);

  SECTION("the lazy diagonal of the registered multiplicity example agrees") {
    LazyOperator reg = example_registry("ch1_shift_multiplicity").ops.at("T");
    for (long long lvl = -4; lvl <= 6; ++lvl) {
      TreeVertex v = lvl < 0   ? TreeVertex::Up(-lvl)
                     : lvl == 0 ? TreeVertex::Core(0)
                                : TreeVertex::Tail(0, lvl);
      auto d = reg.diag_limit(BasisIndex::Int(lvl));
      REQUIRE(d.has_value());
      CHECK(*d == a.alpha(v));
    }
  }

  SECTION("isometry rows of the asymptote sum to one exactly") {
    CHECK(a.beta(TreeVertex::Tail(0, 1)) == 1.0);
    CHECK(a.beta(TreeVertex::Core(0)) == 1.0);
    CHECK(a.beta(TreeVertex::Up(1)) == 1.0);
    CHECK(a.beta_row_sum(TreeVertex::Core(0)) == 1.0);
    CHECK(a.beta_row_sum(TreeVertex::Tail(0, 2)) == 1.0);
    CHECK(a.beta_row_sum(TreeVertex::Up(2)) == 1.0);
  }

  SECTION("asymptote model and dual flags") {
    CHECK(a.cls == AsymptoteCls::bilateral_plus);
    CHECK(a.unilateral_count == 0);
    REQUIRE(a.asym_corank.has_value());
    CHECK(*a.asym_corank == 0);
    CHECK(a.cdot0);  // the ancestor products vanish
    CHECK_THROWS_AS(dual_isometric_asymptote(s), std::invalid_argument);
  }

  SECTION("similarity flags") {
    TreeSimilarityReport sim = similarity_flags(s);
    CHECK(sim.shape == "bilateral");
    CHECK(sim.left_product == 0.0);
    CHECK(sim.total_product == 0.0);
    CHECK_FALSE(sim.similar_to_isometry);
    CHECK_FALSE(sim.similar_to_unitary);
    CHECK_FALSE(sim.similar_to_coisometry);
    CHECK(sim.alpha_inf == 0.0);
  }

  SECTION("adjoint cyclicity holds under the contraction theorem") {
    AdjointCyclicityReport rep = adjoint_cyclicity_flags(s);
    CHECK(rep.c1dot);
    CHECK_FALSE(rep.rooted);
    CHECK(rep.br == 0);
    REQUIRE(rep.adjoint_cyclic.has_value());
    CHECK(*rep.adjoint_cyclic);
  }
}

TEST_CASE("rooted chain asymptotics") {
  TreeShift s = rooted_chain();
  TreeAsymptotics a = analyze_asymptotics(s);

  CHECK(a.alpha(TreeVertex::Tail(0, 1)) == Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(a.alpha(TreeVertex::Core(2)) == Approx(0.5).epsilon(1e-12));
  CHECK(a.alpha(TreeVertex::Core(1)) == Approx(0.32).epsilon(1e-12));
  CHECK(a.alpha(TreeVertex::Core(0)) == Approx(0.08).epsilon(1e-12));
  CHECK(a.alpha(TreeVertex::Core(3)) == 0.0);
  CHECK(a.stable(TreeVertex::Core(3)));
  CHECK_FALSE(a.stable(TreeVertex::Core(0)));
  // The dead leaf pins the infimum at zero even though every surviving
  // vertex stays above 0.08.
  CHECK(a.alpha_inf == 0.0);

  // The dead leaf drops out of the asymptote: its corank is one below the
  // shift's.
  CHECK(a.cls == AsymptoteCls::unilateral_sum);
  CHECK(a.unilateral_count == 1);
  REQUIRE(a.asym_corank.has_value());
  CHECK(*a.asym_corank == 1);
  CHECK(corank(s) == 2);

  CHECK(a.beta_row_sum(TreeVertex::Core(1)) == 1.0);
  CHECK(a.beta_row_sum(TreeVertex::Core(2)) == 1.0);
  CHECK(a.beta_row_sum(TreeVertex::Tail(0, 3)) == Approx(1.0).epsilon(1e-13));
  CHECK(a.beta(TreeVertex::Core(2)) == Approx(0.8 * std::sqrt(0.5 / 0.32)).epsilon(1e-12));
  CHECK_THROWS_AS(a.beta(TreeVertex::Core(3)), std::invalid_argument);
  CHECK_THROWS_AS(a.beta_row_sum(TreeVertex::Core(3)), std::invalid_argument);
  CHECK_THROWS_AS(a.beta(TreeVertex::Core(0)), std::invalid_argument);

  TreeSimilarityReport sim = similarity_flags(s);
  CHECK(sim.shape == "other");
  CHECK_FALSE(sim.similar_to_isometry);

  CHECK_THROWS_AS(dual_data(s, TreeVertex::Core(0)), std::invalid_argument);
  CHECK_THROWS_AS(a.a_level(0), std::invalid_argument);
  CHECK_THROWS_AS(dual_isometric_asymptote(s), std::invalid_argument);
  CHECK_NOTHROW(isometric_asymptote(s));
}

TEST_CASE("stable shift has an empty asymptote") {
  DirectedTree t = DirectedTree::build({"r"}, {-1}, {}, std::nullopt);
  TreeShift s = TreeShift::build(std::move(t), {1.0});
  CHECK(s.norm == 0.0);
  CHECK(corank(s) == 1);
  TreeAsymptotics a = analyze_asymptotics(s);
  CHECK(a.c0dot);
  CHECK(a.cls == AsymptoteCls::unilateral_sum);
  CHECK(a.unilateral_count == 0);
  CHECK_THROWS_AS(isometric_asymptote(s), std::invalid_argument);
  AdjointCyclicityReport rep = adjoint_cyclicity_flags(s);
  CHECK_FALSE(rep.adjoint_cyclic.has_value());
}

TEST_CASE("dual family of the descendant-free line") {
  TreeShift s = backward_line();
  CHECK(s.contraction);
  CHECK(corank(s) == 0);

  TreeAsymptotics a = analyze_asymptotics(s);
  CHECK(a.c0dot);
  CHECK_FALSE(a.cdot0);
  CHECK(a.dual_unilateral);

  DualData d2 = dual_data(s, TreeVertex::Up(2));
  CHECK(d2.a == 1.0);
  CHECK(d2.h.coeff(tree_index(TreeVertex::Up(2))).real() == 1.0);
  DualData d0 = dual_data(s, TreeVertex::Core(0));
  CHECK(d0.a == Approx(0.81).epsilon(1e-12));

  DualAsymptoteReport rep = dual_isometric_asymptote(s);
  CHECK(rep.unilateral);
  for (const auto& [lvl, av] : rep.a_by_level) {
    if (lvl < 0) CHECK(av == 1.0);
    if (lvl == 0) CHECK(av == Approx(0.81).epsilon(1e-12));
  }
  for (double n : rep.sampled_norms) CHECK(n == 1.0);

  TreeSimilarityReport sim = similarity_flags(s);
  CHECK(sim.shape == "backward");
  CHECK(sim.left_product == Approx(0.9).epsilon(1e-12));
  CHECK(sim.similar_to_coisometry);
  CHECK_FALSE(sim.similar_to_unitary);
  CHECK_FALSE(sim.similar_to_isometry);

  AdjointCyclicityReport ac = adjoint_cyclicity_flags(s);
  CHECK_FALSE(ac.c1dot);
  CHECK_FALSE(ac.adjoint_cyclic.has_value());
  CHECK_FALSE(ac.reason.empty());
}

TEST_CASE("dual family with a hanging ray") {
  TreeShift s = dual_tail_line();
  TreeAsymptotics a = analyze_asymptotics(s);
  CHECK_FALSE(a.c0dot);
  CHECK_FALSE(a.cdot0);
  CHECK_FALSE(a.dual_unilateral);

  CHECK(a.a_level(-2) == 1.0);
  CHECK(a.a_level(0) == Approx(0.81).epsilon(1e-12));
  CHECK(a.a_level(1) == Approx(0.2025).epsilon(1e-12));
  CHECK(a.a_level(2) == Approx(0.2025).epsilon(1e-12));
  FinVec h2 = a.h_level(2);
  CHECK(h2.coeff(tree_index(TreeVertex::Tail(0, 2))).real() == Approx(0.45).epsilon(1e-12));

  DualAsymptoteReport rep = dual_isometric_asymptote(s);
  CHECK_FALSE(rep.unilateral);
  for (double n : rep.sampled_norms) CHECK(n == 1.0);

  AdjointCyclicityReport ac = adjoint_cyclicity_flags(s);
  REQUIRE(ac.adjoint_cyclic.has_value());
  CHECK(*ac.adjoint_cyclic);
}

TEST_CASE("seeded coranks match the branching count") {
  std::mt19937 rng(313);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(rng() % 5);
    std::vector<std::string> names;
    std::vector<int> parent(n);
    parent[0] = -1;
    names.emplace_back("v0");
    for (int i = 1; i < n; ++i) {
      parent[i] = static_cast<int>(rng() % i);
      names.push_back("v" + std::to_string(i));
    }
    std::vector<DirectedTree::Tail> tails;
    std::vector<int> tail_count(n, 0);
    for (int i = 0; i < n; ++i) {
      if (rng() % 2 == 0) {
        DirectedTree::Tail tl;
        tl.attach = i;
        tl.gen = WeightGen::constant_gen(0.8);
        tails.push_back(tl);
        ++tail_count[i];
      }
    }
    bool rootless = trial % 2 == 1;
    std::optional<WeightGen> up;
    if (rootless) up = WeightGen::table_then_constant_gen({{0, 0.9}}, 1.0);

    DirectedTree t = DirectedTree::build(names, parent, tails, up);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.3 + 0.9 * u(rng);
    TreeShift s = TreeShift::build(std::move(t), std::move(w));

    std::vector<int> deg(n, 0);
    for (int i = 1; i < n; ++i) ++deg[parent[i]];
    for (int i = 0; i < n; ++i) deg[i] += tail_count[i];
    long long br = 0;
    for (int i = 0; i < n; ++i) {
      if (deg[i] >= 1) br += deg[i] - 1;
    }
    CAPTURE(trial, n, rootless);
    CHECK(branching_index(s.tree) == br);
    CHECK(corank(s) == br + (rootless ? 0 : 1));
    CHECK(s.norm > 0.0);
  }
}

TEST_CASE("two-leaf similarity model") {
  TreeShift s = two_leaf_tree();
  CHECK(branching_index(s.tree) == 1);
  REQUIRE(tree_leaves(s.tree).size() == 2);

  LeafTreeReport rep = leaf_tree_similarity(s);
  CHECK(rep.two_leaves);
  CHECK(rep.k0 == 2);
  REQUIRE(rep.g_norm_sq.size() == 2);
  CHECK(rep.g_norm_sq[0] == 20.0);
  CHECK(rep.g_norm_sq[1] == 32.0);
  for (double r : rep.residual) CHECK(r == 0.0);
  CHECK(rep.max_residual == 0.0);
  CHECK(rep.cyclic == CyclicFlag::yes);
  CHECK(rep.note.find("two leaves") != std::string::npos);

  REQUIRE(rep.N.rows() == 2);
  CHECK(std::abs(rep.N(1, 0)) == std::sqrt(20.0 / 32.0));
  CHECK(std::abs(rep.N(0, 0)) == 0.0);
  CHECK(std::abs(rep.N(0, 1)) == 0.0);
  CHECK(std::abs(rep.N(1, 1)) == 0.0);

  SECTION("line operator is cut at the far leaf") {
    CHECK(rep.W.accepts(BasisIndex::Int(3)));
    CHECK_FALSE(rep.W.accepts(BasisIndex::Int(4)));
    CHECK_FALSE(rep.W.accepts(BasisIndex::Nat(1, 1)));
    CHECK(rep.W.apply_basis(BasisIndex::Int(3)).empty());
    CHECK(rep.W.apply_basis(BasisIndex::Int(0)).coeff(BasisIndex::Int(1)).real() == 0.5);
    CHECK(rep.W.apply_basis(BasisIndex::Int(-2)).coeff(BasisIndex::Int(-1)).real() == 1.0);
    CHECK(rep.W.adjoint_basis(BasisIndex::Int(1)).coeff(BasisIndex::Int(0)).real() == 0.5);
  }

  SECTION("model basis lands on the tree") {
    CHECK(rep.X(BasisIndex::Int(2)).coeff(tree_index(TreeVertex::Core(3))).real() == 1.0);
    CHECK(rep.X(BasisIndex::Int(-1)).coeff(tree_index(TreeVertex::Up(1))).real() == 1.0);
    FinVec g1 = rep.X(BasisIndex::Nat(1, 1));
    CHECK(g1.coeff(tree_index(TreeVertex::Core(1))).real() ==
          Approx(2.0 / std::sqrt(20.0)).epsilon(1e-14));
    CHECK(g1.coeff(tree_index(TreeVertex::Core(2))).real() ==
          Approx(-4.0 / std::sqrt(20.0)).epsilon(1e-14));
    CHECK_THROWS_AS(rep.X(BasisIndex::Nat(3, 1)), std::invalid_argument);
    CHECK_THROWS_AS(rep.X(BasisIndex::Pair(1, 1)), std::invalid_argument);
  }

  SECTION("intertwining rechecked against the raw shift") {
    CHECK(shift_apply_adjoint(s, rep.X(BasisIndex::Nat(1, 1))).norm() == 0.0);
    FinVec lhs = shift_apply_adjoint(s, rep.X(BasisIndex::Nat(2, 1)));
    FinVec rhs = std::sqrt(0.625) * rep.X(BasisIndex::Nat(1, 1));
    CHECK((lhs - rhs).norm() < 1e-15);
  }
}

TEST_CASE("one-leaf similarity model") {
  TreeShift s = one_leaf_tree();
  CHECK(s.contraction);

  LeafTreeReport rep = leaf_tree_similarity(s);
  CHECK_FALSE(rep.two_leaves);
  CHECK(rep.k0 == 1);
  REQUIRE(rep.g_norm_sq.size() == 1);
  CHECK(rep.g_norm_sq[0] == 20.0);
  CHECK(rep.max_residual == 0.0);
  CHECK(rep.cyclic == CyclicFlag::yes);
  CHECK(rep.note.find("one leaf") != std::string::npos);

  CHECK(rep.W.accepts(BasisIndex::Int(40)));
  CHECK(rep.W.apply_basis(BasisIndex::Int(1)).coeff(BasisIndex::Int(2)).real() == 1.0);
  CHECK(rep.X(BasisIndex::Int(4)).coeff(tree_index(TreeVertex::Tail(0, 4))).real() == 1.0);
  CHECK(shift_apply_adjoint(s, rep.X(BasisIndex::Nat(1, 1))).norm() == 0.0);
}

TEST_CASE("leafless branch model") {
  WeightGen trunk = WeightGen::table_then_constant_gen({{1, 0.5}}, 1.0);
  WeightGen branch = WeightGen::table_then_constant_gen({{1, 0.25}}, 1.0);
  TreeShift s = leafless_pair(trunk, branch);
  CHECK(s.contraction);
  CHECK(branching_index(s.tree) == 1);
  CHECK(tree_leaves(s.tree).empty());

  TildeTreeReport rep = tilde_tree_report(s, 16);
  REQUIRE(rep.g_norm_sq.size() == 16);
  for (double g : rep.g_norm_sq) CHECK(g == 20.0);
  for (double r : rep.residual) CHECK(r == 0.0);
  CHECK(rep.max_residual == 0.0);
  CHECK(rep.quasiaffine);
  REQUIRE(rep.ratio_bounded.has_value());
  CHECK(*rep.ratio_bounded);
  CHECK(rep.ratio_sup == 0.5);
  CHECK(rep.similar);
  CHECK(rep.cyclic == CyclicFlag::no);
  CHECK(rep.note.find("bounded") != std::string::npos);
  CHECK(rep.note.find("swapped") == std::string::npos);

  for (double x : rep.x_span_norms) {
    CHECK(x >= 1.0);
    CHECK(x <= rep.x_norm_bound);
  }
  CHECK(rep.x_span_norms[0] == Approx(rep.x_span_norms[7]).epsilon(1e-14));

  SECTION("model operator") {
    CHECK(rep.wtilde.apply_basis(BasisIndex::Int(0)).coeff(BasisIndex::Int(1)).real() == 0.5);
    CHECK(rep.wtilde.apply_basis(BasisIndex::Nat(2, 1)).coeff(BasisIndex::Nat(3, 1)).real() ==
          1.0);
    CHECK(rep.wtilde.adjoint_basis(BasisIndex::Nat(1, 1)).empty());
    CHECK(rep.wtilde.adjoint_basis(BasisIndex::Int(-1)).coeff(BasisIndex::Int(-2)).real() == 1.0);
    CHECK(rep.wtilde.adjoint_basis(BasisIndex::Int(1)).coeff(BasisIndex::Int(0)).real() == 0.5);
    CHECK_THROWS_AS(rep.wtilde.adjoint_basis(BasisIndex::Pair(1, 1)), std::invalid_argument);
  }

  SECTION("orientation is swapped when only the reverse ratio is bounded") {
    TreeShift s2 = leafless_pair(WeightGen::constant_gen(0.5), WeightGen::constant_gen(1.0));
    TildeTreeReport r2 = tilde_tree_report(s2);
    REQUIRE(r2.ratio_bounded.has_value());
    CHECK(*r2.ratio_bounded);
    CHECK(r2.similar);
    CHECK(r2.ratio_sup == 0.5);
    CHECK(r2.note.find("swapped") != std::string::npos);
    CHECK(r2.cyclic == CyclicFlag::unknown);
  }

  SECTION("unsupported generators leave the ratio open") {
    TreeShift s3 = leafless_pair(WeightGen::geometric_gen(0.5), WeightGen::constant_gen(1.0));
    TildeTreeReport r3 = tilde_tree_report(s3);
    CHECK_FALSE(r3.ratio_bounded.has_value());
    CHECK_FALSE(r3.similar);
    CHECK(r3.note.find("supports") != std::string::npos);
  }

  SECTION("model guards") {
    CHECK_THROWS_AS(tilde_tree_report(s, 3), std::invalid_argument);
    CHECK_THROWS_AS(tilde_tree_report(two_leaf_tree()), std::invalid_argument);
    CHECK_THROWS_AS(leaf_tree_similarity(s), std::invalid_argument);
    CHECK_THROWS_AS(leaf_tree_similarity(bilateral_line()), std::invalid_argument);
    CHECK_THROWS_AS(leaf_tree_similarity(rooted_chain()), std::invalid_argument);
  }
}

TEST_CASE("backward cyclic vector on flat weights") {
  auto ones = [](int, long long) { return 1.0; };
  BackwardCyclicResult res = backward_cyclic_vector(ones, 2, 40, 3);

  REQUIRE(res.support_j.size() == 8);
  CHECK(res.support_k[0] == 1);
  CHECK(res.support_k[7] == 36);
  CHECK(res.zero_branch == -1);
  for (std::size_t i = 0; i < res.support_j.size(); ++i) {
    CHECK(res.support_j[i] == static_cast<int>(i % 2));
    CHECK(res.xi[i] > 0.0);
  }
  for (const auto& [u, c] : res.f.entries()) {
    CHECK(c.imag() == 0.0);
    CHECK(c.real() > 0.0);
  }
  REQUIRE(res.sigma.size() == 3);
  for (int m = 1; m <= 3; ++m) CHECK(res.sigma[m - 1] <= std::ldexp(1.0, -m));
  CHECK(res.note.find("round-robin") != std::string::npos);

  recheck_certificates(ones, res, 3);
}

TEST_CASE("backward cyclic vector with decaying weights") {
  auto w = [](int, long long i) { return 1.0 / static_cast<double>(i + 1); };
  BackwardCyclicResult res = backward_cyclic_vector(w, 3, 100, 4);
  REQUIRE(res.sigma.size() == 4);
  for (int m = 1; m <= 4; ++m) CHECK(res.sigma[m - 1] <= std::ldexp(1.0, -m));
  recheck_certificates(w, res, 4);
}

TEST_CASE("backward cyclic vector splits at a single zero weight") {
  auto w = [](int j, long long i) { return (j == 1 && i == 0) ? 0.0 : 1.0; };
  BackwardCyclicResult res = backward_cyclic_vector(w, 2, 60, 3);

  CHECK(res.zero_branch == 1);
  CHECK(res.zero_index == 0);
  CHECK(res.f.coeff(BasisIndex::Pair(1, 0)).real() == 1.0);
  CHECK(res.note.find("split") != std::string::npos);
  for (std::size_t i = 0; i < res.support_j.size(); ++i) {
    long long base = static_cast<long long>(i + 1) * (i + 2) / 2;
    CHECK(res.support_k[i] == (res.support_j[i] == 1 ? base + 1 : base));
  }
  for (int m = 1; m <= 3; ++m) CHECK(res.sigma[m - 1] <= std::ldexp(1.0, -m));
  recheck_certificates(w, res, 3);
}

TEST_CASE("backward cyclic vector input guards") {
  auto ones = [](int, long long) { return 1.0; };
  auto two_zeros = [](int j, long long i) {
    return ((j == 0 && i == 0) || (j == 1 && i == 5)) ? 0.0 : 1.0;
  };
  auto negative = [](int, long long i) { return i == 3 ? -1.0 : 1.0; };

  CHECK_THROWS_AS(backward_cyclic_vector(two_zeros, 2, 40, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(negative, 2, 40, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 0, 40, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 65, 40, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 2, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 2, 200001, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 2, 40, 0), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 2, 40, 49), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(ones, 2, 5, 3), std::invalid_argument);
  CHECK_THROWS_AS(backward_cyclic_vector(std::function<double(int, long long)>{}, 2, 40, 3),
                  std::invalid_argument);
}

TEST_CASE("uniform binary preset") {
  BinaryTreeReport rep = binary_tree_preset();
  CHECK(rep.beta == std::sqrt(0.5));
  CHECK(rep.isometry);
  CHECK(rep.alpha_value == 1.0);
  CHECK(rep.a_value == 0.0);
  CHECK(rep.cnu);
  CHECK_FALSE(rep.asym_corank.has_value());
  CHECK(rep.spine_lower_bound == std::exp(-2.0 * inv_square_tail_sum(0)));
  CHECK(rep.spine_lower_bound == Approx(0.0373).margin(5e-4));
  CHECK_FALSE(rep.spine_cnu);
}
