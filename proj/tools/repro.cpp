#include "repro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "otlab/cesaro.hpp"
#include "otlab/dirtree.hpp"
#include "otlab/lazyop.hpp"
#include "otlab/matkernel.hpp"
#include "otlab/registry.hpp"
#include "otlab/weightgen.hpp"

namespace otcli {

namespace {

using namespace otlab;

void add(std::vector<Verdict>& out, std::string check, bool pass, std::string provenance,
         std::string detail) {
  out.push_back({std::move(check), pass, std::move(provenance), std::move(detail)});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void shift_multiplicity(json& values, json&, std::vector<Verdict>& out) {
  LazyOperator T = example_registry("ch1_shift_multiplicity").ops.at("T");
  json rows = json::array();
  bool exact = true;
  bool routed = true;
  for (long long k = -5; k <= 6; ++k) {
    double want = k > 0 ? 1.0 : std::ldexp(1.0, static_cast<int>(2 * k - 2));
    auto d = T.diag_limit(BasisIndex::Int(k));
    AsymptoticValue av = asymptotic_diag_value(T, BasisIndex::Int(k));
    exact = exact && d.has_value() && *d == want;
    routed = routed && av.route == AsymptoticValue::Route::closed_form && d && av.value == *d;
    rows.push_back({{"level", k}, {"value", d ? json(*d) : json()}});
  }
  values["diagonal"] = std::move(rows);
  add(out, "diagonal_matches_closed_form", exact, "PAPER",
      "1 above the base level and 4^{k-1} at or below it, exactly");
  add(out, "generic_route_agrees", routed, "DERIVED",
      "blind iteration reproduces the closed-form diagonal");
}

void coincidence_pair(json& values, json&, std::vector<Verdict>& out) {
  OperatorSet set = example_registry("ch2_coincidence_pair");
  const LazyOperator& T1 = set.ops.at("T1");
  const LazyOperator& T2 = set.ops.at("T2");
  const LazyOperator& P = set.ops.at("T2T1");
  int exact = 0;
  for (long long i = 1; i <= 10; ++i) {
    for (long long j = 1; j <= 5; ++j) {
      double want = j == 1 ? 0.5 : static_cast<double>(j - 1) / static_cast<double>(j);
      auto d1 = T1.diag_limit(BasisIndex::Pair(i, j));
      auto d2 = T2.diag_limit(BasisIndex::Pair(i, j));
      if (d1 && d2 && *d1 == *d2 && *d1 == want) ++exact;
    }
  }
  int prod = 0;
  for (long long i = 1; i <= 10; ++i) {
    auto dp = P.diag_limit(BasisIndex::Pair(i, 1));
    if (dp && *dp == 1.0) ++prod;
  }
  values["grid_matches"] = exact;
  values["product_row_matches"] = prod;
  add(out, "pair_diagonals_coincide", exact == 50, "PAPER",
      std::to_string(exact) + "/50 sampled vectors: both shifts share 1/2 and (j-1)/j exactly");
  add(out, "product_diagonal_is_one", prod == 10, "PAPER",
      "the composed shift restores full asymptotic mass on the first row");
}

void stable_product_pair(json& values, json&, std::vector<Verdict>& out) {
  const LazyOperator& P = example_registry("ch2_stable_product_pair").ops.at("T2T1");
  int exact = 0;
  for (long long i = 1; i <= 10; ++i) {
    for (long long j = 1; j <= 5; ++j) {
      auto dp = P.diag_limit(BasisIndex::Pair(i, j));
      double want = static_cast<double>(i) / static_cast<double>(i + 1);
      if (dp && *dp == want) ++exact;
    }
  }
  values["grid_matches"] = exact;
  add(out, "product_diagonal_telescopes", exact == 50, "PAPER",
      std::to_string(exact) + "/50 sampled vectors carry i/(i+1) exactly");
}

double weight_at(const LazyOperator& T, long long j) {
  return T.apply_basis(BasisIndex::Nat(j)).coeff(BasisIndex::Nat(j + 1)).real();
}

void banach_dependent(json& values, json& certificates, std::vector<Verdict>& out) {
  LazyOperator T = example_registry("ch3_banach_dependent").ops.at("T");
  // The n-step diagonal at the origin is the cumulative product of squared
  // weights; each doubling at 3^l is released l steps later, so the products
  // equal the squared run-indicator sequence.
  WeightGen runs = WeightGen::run_indicator_gen(3, std::sqrt(2.0));
  const long long scan_top = 59059 + 10 - 1;
  double prod = 1.0, worst_drift = 0.0;
  for (long long j = 1; j <= scan_top; ++j) {
    double w = weight_at(T, j);
    prod *= w * w;
    double closed = runs.weight(j);
    worst_drift = std::max(worst_drift, std::abs(prod - closed * closed));
  }
  auto xsq = [&runs](long long j) {
    double w = runs.weight(j);
    return w * w;
  };
  BanachRangeReport rep = banach_range_bounds(xsq, 59059, 10, {59049});
  double mean = 0.0;
  bool found = false;
  for (const auto& [n, m] : rep.cesaro) {
    if (n == 59049) {
      mean = m;
      found = true;
    }
  }
  json windows = json::array();
  bool range_ok = rep.windows.size() >= 10;
  for (const WindowExtremum& we : rep.windows) {
    windows.push_back({{"length", we.length}, {"min_avg", we.min_avg}, {"max_avg", we.max_avg}});
    range_ok = range_ok && std::abs(we.max_avg - 2.0) <= 1e-9 && std::abs(we.min_avg - 1.0) <= 1e-12;
  }
  values["mean_at_power_checkpoint"] = mean;
  values["windows"] = std::move(windows);
  certificates["mean_distance_from_one"] = std::abs(mean - 1.0);
  certificates["cumulative_product_drift"] = worst_drift;
  add(out, "diagonal_products_form_runs", worst_drift <= 1e-12, "DERIVED",
      "cumulative squared weights match the run sequence within " + fmt(worst_drift));
  add(out, "mean_hugs_one", found && std::abs(mean - 1.0) <= 0.02, "PAPER",
      "partial mean " + fmt(mean) + " at the tenth power of the base");
  add(out, "window_extremes_span_range", range_ok, "PAPER",
      "every window length up to 10 attains averages 1 and 2");
}

void no_cesaro(json& values, json& certificates, std::vector<Verdict>& out) {
  LazyOperator T = example_registry("ch3_no_cesaro").ops.at("T");
  const long long marks[6] = {2187, 4374, 6561, 13122, 19683, 39366};
  double means[6] = {0, 0, 0, 0, 0, 0};
  double prod_sq = 1.0, sum = 0.0;
  int next = 0;
  for (long long j = 1; j <= 39366; ++j) {
    double w = weight_at(T, j);
    prod_sq *= w * w;
    sum += prod_sq;
    if (next < 6 && j == marks[next]) {
      means[next] = sum / static_cast<double>(j);
      ++next;
    }
  }
  json rows = json::array();
  double min_split = 1e300;
  for (int l = 0; l < 3; ++l) {
    double split = std::abs(means[2 * l] - means[2 * l + 1]);
    min_split = std::min(min_split, split);
    rows.push_back({{"n", marks[2 * l]},
                    {"mean", means[2 * l]},
                    {"n_mid", marks[2 * l + 1]},
                    {"mean_mid", means[2 * l + 1]},
                    {"split", split}});
  }
  values["checkpoints"] = std::move(rows);
  certificates["min_split"] = min_split;
  add(out, "partial_means_do_not_converge", next == 6 && min_split > 0.2, "PAPER",
      "checkpoint means stay " + fmt(min_split) + " apart at three consecutive scales");
}

void not_power_bounded(json& values, json&, std::vector<Verdict>& out) {
  LazyOperator T = example_registry("ch3_not_power_bounded").ops.at("T");
  double prod = 1.0, peak = 0.0;
  long long peak_n = 0;
  for (long long j = 1; j <= 2000; ++j) {
    prod *= weight_at(T, j);
    if (prod > peak) {
      peak = prod;
      peak_n = j;
    }
  }
  values["peak_partial_product"] = peak;
  values["peak_at"] = peak_n;
  add(out, "power_norms_grow", peak >= 8.0, "DERIVED",
      "partial weight products reach " + fmt(peak) + " by step " + std::to_string(peak_n));
  add(out, "no_diagonal_oracle", !T.diag_limit, "TRIVIAL",
      "the scenario deliberately ships without a closed-form diagonal");
  bool threw = false;
  try {
    asymptotic_diag_value(T, BasisIndex::Nat(1));
  } catch (const std::exception&) {
    threw = true;
  }
  add(out, "asymptotics_refuse_to_certify", threw, "DERIVED",
      "the bracketed route rejects the unbounded iterates instead of truncating");
}

void counterexample_3x3(json& values, json& certificates, std::vector<Verdict>& out) {
  CMatrix M(3, 3);
  M << Complex(0, 1), Complex(2, 0), Complex(1, 0), Complex(0, 0), Complex(1, 0), Complex(0, 1),
      Complex(1, 0), Complex(0, 0), Complex(4, 0);
  CMatrix D = CMatrix::Zero(3, 3);
  D(0, 0) = Complex(1, 0);
  D(1, 1) = Complex(-1, 0);
  D(2, 2) = Complex(0, 1);
  CMatrix T = M * D * M.inverse();
  HarmonicIdentity h = harmonic_identity_residual(T);
  std::vector<double> eigs = h.combined_eigs;
  std::sort(eigs.begin(), eigs.end());
  const double ref[3] = {1.27178, 2.1285, 2.59972};
  double dev = 0.0;
  for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(eigs[i] - ref[i]));
  values["combined_eigenvalues"] = eigs;
  values["reference"] = std::vector<double>(ref, ref + 3);
  certificates["eigenvalue_deviation"] = dev;
  certificates["identity_residual"] = h.residual;
  add(out, "combined_spectrum_matches", dev <= 1e-3, "PAPER",
      "summed inverse limits have spectrum within " + fmt(dev) + " of the printed triple");
  add(out, "two_dim_identity_breaks", h.residual > 0.5, "DERIVED",
      "the dimension-two harmonic identity misses by " + fmt(h.residual) + " here");
}

void counterexample_ch5(json& values, json& certificates, std::vector<Verdict>& out) {
  OperatorSet set = example_registry("ch5_counterexample");
  const LazyOperator& T00 = set.ops.at("T00");
  const LazyOperator& T11 = set.ops.at("T11");
  const LazyOperator& V = set.ops.at("V");
  const LazyOperator& Y = set.ops.at("Y");
  double worst = 0.0;
  for (long long j = 1; j <= 20; ++j) {
    for (long long i = -20; i <= 20; ++i) {
      FinVec f = FinVec::basis(BasisIndex::Pair(j, i, 1));
      FinVec r = apply(T00, apply(Y, f)) - apply(Y, apply(T11, f)) + apply(T00, apply(V, f));
      worst = std::max(worst, r.norm());
    }
  }
  double col = 0.0;
  for (long long m = 1; m <= 50; ++m) {
    col = std::max(col, Y.adjoint_basis(BasisIndex::Nat(m)).norm_sq());
  }
  values["column_norm_sq_peak"] = col;
  certificates["intertwining_residual"] = worst;
  add(out, "intertwining_exact", worst == 0.0, "PAPER",
      "the displayed relation cancels to the last bit on 820 basis vectors");
  add(out, "column_bound", col == 1.0625 && col <= 2.0, "PAPER",
      "squared column sums peak at " + fmt(col) + ", inside the printed bound 2");
}

void binary_tree_cnu(json& values, json& certificates, std::vector<Verdict>& out) {
  BinaryTreeReport rep = binary_tree_preset();
  values["beta"] = rep.beta;
  values["isometry"] = rep.isometry;
  values["alpha_value"] = rep.alpha_value;
  values["a_value"] = rep.a_value;
  values["cnu"] = rep.cnu;
  values["asym_corank"] = rep.asym_corank ? json(*rep.asym_corank) : json("infinite");
  values["spine_lower_bound"] = rep.spine_lower_bound;
  values["spine_cnu"] = rep.spine_cnu;
  certificates["spine_bound_formula_gap"] =
      std::abs(rep.spine_lower_bound - std::exp(-2.0 * inv_square_tail_sum(0)));
  add(out, "uniform_tree_is_cnu_isometry",
      rep.beta == std::sqrt(0.5) && rep.isometry && rep.alpha_value == 1.0 && rep.a_value == 0.0 &&
          rep.cnu && !rep.asym_corank,
      "PAPER", "equal dyadic child weights give an isometry with vanishing dual family");
  add(out, "spine_reweighting_restores_unitary_part",
      rep.spine_lower_bound == std::exp(-2.0 * inv_square_tail_sum(0)) &&
          rep.spine_lower_bound > 0.03 && !rep.spine_cnu,
      "DERIVED",
      "certified ancestor-product bound " + fmt(rep.spine_lower_bound) + " on the spine");
}

TreeShift leafless_dyadic_pair() {
  DirectedTree::Tail t0;
  t0.attach = 0;
  t0.gen = WeightGen::table_then_constant_gen({{1, 0.5}}, 1.0);
  DirectedTree::Tail t1;
  t1.attach = 0;
  t1.gen = WeightGen::table_then_constant_gen({{1, 0.25}}, 1.0);
  DirectedTree t = DirectedTree::build({"b"}, {-1}, {t0, t1},
                                       WeightGen::table_then_constant_gen({{0, 0.5}}, 1.0));
  return TreeShift::build(std::move(t), {1.0});
}

void tilde_tree(json& values, json& certificates, std::vector<Verdict>& out) {
  TreeShift s = leafless_dyadic_pair();
  TildeTreeReport rep = tilde_tree_report(s);
  values["g_norm_sq_head"] =
      std::vector<double>(rep.g_norm_sq.begin(),
                          rep.g_norm_sq.begin() + std::min<std::size_t>(4, rep.g_norm_sq.size()));
  values["ratio_sup"] = rep.ratio_sup;
  values["similar"] = rep.similar;
  values["cyclic"] = rep.cyclic == CyclicFlag::yes   ? "yes"
                     : rep.cyclic == CyclicFlag::no ? "no"
                                                    : "unknown";
  values["note"] = rep.note;
  certificates["model_residual"] = rep.max_residual;
  add(out, "quasiaffine_transform_exact", rep.quasiaffine && rep.max_residual == 0.0, "DERIVED",
      "norm-ratio intertwining cancels exactly for the dyadic pair");
  add(out, "branch_over_trunk_bounded",
      rep.ratio_bounded.value_or(false) && rep.ratio_sup == 0.5 && rep.similar, "PAPER",
      "bounded ratio products certify similarity to the separated model");
}

TreeShift two_leaf_tree() {
  DirectedTree t = DirectedTree::build({"b", "l1", "r1", "l2", "r2", "l3"}, {-1, 0, 0, 1, 2, 3},
                                       {}, WeightGen::table_then_constant_gen({{0, 0.5}}, 1.0));
  return TreeShift::build(std::move(t), {1.0, 0.5, 0.25, 0.5, 1.0, 0.5});
}

void leaf_tree(json& values, json& certificates, std::vector<Verdict>& out) {
  TreeShift s = two_leaf_tree();
  LeafTreeReport rep = leaf_tree_similarity(s);
  values["k0"] = rep.k0;
  values["two_leaves"] = rep.two_leaves;
  values["g_norm_sq"] = rep.g_norm_sq;
  values["nilpotent_entry"] = rep.k0 >= 2 ? rep.N(1, 0).real() : 0.0;
  values["note"] = rep.note;
  certificates["model_residual"] = rep.max_residual;
  add(out, "branch_splits_into_line_plus_nilpotent",
      rep.k0 == 2 && rep.two_leaves && rep.g_norm_sq == std::vector<double>{20.0, 32.0},
      "DERIVED", "two-step branch with exact combined norms 20 and 32");
  add(out, "model_intertwines_exactly", rep.max_residual == 0.0, "DERIVED",
      "similarity transform commutes with the shift to the last bit");
  add(out, "cyclic_by_branch_criterion", rep.cyclic == CyclicFlag::yes, "PAPER",
      "one branch vertex and two leaves admit a cyclic vector");
  add(out, "nilpotent_weight_matches",
      rep.k0 >= 2 && rep.N(1, 0) == Complex(std::sqrt(20.0 / 32.0)), "DERIVED",
      "norm-ratio weight carries sqrt(20/32)");
}

}  // namespace

void run_scenario(const std::string& id, json& values, json& certificates,
                  std::vector<Verdict>& verdicts) {
  if (id == "ch1_shift_multiplicity") return shift_multiplicity(values, certificates, verdicts);
  if (id == "ch2_coincidence_pair") return coincidence_pair(values, certificates, verdicts);
  if (id == "ch2_stable_product_pair") return stable_product_pair(values, certificates, verdicts);
  if (id == "ch3_banach_dependent") return banach_dependent(values, certificates, verdicts);
  if (id == "ch3_no_cesaro") return no_cesaro(values, certificates, verdicts);
  if (id == "ch3_not_power_bounded") return not_power_bounded(values, certificates, verdicts);
  if (id == "ch3_3x3_counterexample") return counterexample_3x3(values, certificates, verdicts);
  if (id == "ch5_counterexample") return counterexample_ch5(values, certificates, verdicts);
  if (id == "ch6_binary_tree_cnu") return binary_tree_cnu(values, certificates, verdicts);
  if (id == "ch6_tilde_tree") return tilde_tree(values, certificates, verdicts);
  if (id == "ch6_leaf_tree") return leaf_tree(values, certificates, verdicts);
  throw SchemaError("unknown scenario \"" + id + "\"; repro --list names the registry");
}

}  // namespace otcli
