#include "driver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "otlab/cesaro.hpp"
#include "otlab/commutant.hpp"
#include "otlab/dirtree.hpp"
#include "otlab/lazyop.hpp"
#include "otlab/matkernel.hpp"
#include "otlab/registry.hpp"
#include "otlab/weightgen.hpp"
#include "repro.hpp"

namespace otcli {

namespace {

using namespace otlab;

void add_verdict(std::vector<Verdict>& out, std::string check, bool pass, std::string provenance,
                 std::string detail) {
  out.push_back({std::move(check), pass, std::move(provenance), std::move(detail)});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

json finite_or_label(double v) {
  if (std::isfinite(v)) return json(v);
  return json(v > 0 ? "infinite" : "-infinite");
}

std::vector<double> hermitian_eigs(const CMatrix& A) {
  HermEig e = eig_hermitian(hermitize(A));
  return std::vector<double>(e.values.data(), e.values.data() + e.values.size());
}

json classification_json(const PowerBoundedReport& rep) {
  json peripheral = json::array();
  for (const auto& c : rep.peripheral) {
    peripheral.push_back({{"value", complex_to_json(c.value)},
                          {"algebraic", c.algebraic},
                          {"geometric", c.geometric}});
  }
  const char* source = rep.verdict_source == PowerBoundedReport::Source::spectral ? "spectral"
                       : rep.verdict_source == PowerBoundedReport::Source::empirical ? "empirical"
                                                                                     : "both";
  return json{{"bounded", rep.bounded},
              {"spectral_radius", rep.spectral_radius},
              {"empirical_sup", rep.empirical_sup},
              {"verdict_source", source},
              {"peripheral", std::move(peripheral)},
              {"warnings", rep.warnings}};
}

json inputs_echo(const RunConfig& cfg) {
  json in{{"subcommand", cfg.subcommand},
          {"tol", cfg.tol},
          {"max_n", cfg.max_n},
          {"truncation", cfg.truncation},
          {"depth", cfg.depth},
          {"format", cfg.format}};
  if (!cfg.input.empty()) in["input"] = cfg.input;
  if (!cfg.op.empty()) in["op"] = cfg.op;
  if (!cfg.vector_path.empty()) in["vector"] = cfg.vector_path;
  if (cfg.subcommand == "cesaro") in["method"] = cfg.method;
  if (cfg.subcommand == "construct") {
    in["values"] = cfg.values;
    in["stable_dim"] = cfg.stable_dim;
  }
  if (cfg.subcommand == "lazy") {
    in["power"] = cfg.power;
    in["asymptotic"] = cfg.asymptotic;
  }
  if (cfg.subcommand == "tree") {
    in["sections"] = json{{"analyze", cfg.analyze},
                          {"asymptote", cfg.asymptote},
                          {"cyclic_vector", cfg.cyclic_vector},
                          {"similarity", cfg.similarity}};
  }
  if (cfg.subcommand == "repro" && !cfg.scenario.empty()) in["scenario"] = cfg.scenario;
  if (cfg.subcommand == "commutant") in["random_trials"] = cfg.random_trials;
  if (cfg.seed) {
    in["seed"] = *cfg.seed;
  } else {
    in["seed"] = nullptr;
  }
  return in;
}

void validate_common(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw SchemaError("config.tol: must be positive");
  if (cfg.max_n < 1) throw SchemaError("config.max_n: must be positive");
  if (cfg.truncation < 1) throw SchemaError("config.truncation: must be positive");
  if (cfg.depth < 1) throw SchemaError("config.depth: must be positive");
  if (cfg.format != "json" && cfg.format != "csv") {
    throw SchemaError("config.format: expected json or csv");
  }
}

CMatrix random_unitary(std::mt19937& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix Z(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) Z(r, c) = Complex(g(rng), g(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(Z);
  CMatrix Q = qr.householderQ();
  CMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = R(j, j);
    if (std::abs(d) > 0.0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

CMatrix random_matrix(std::mt19937& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = Complex(g(rng), g(rng));
  }
  return M;
}

CMatrix random_stable(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double two_pi = 2.0 * 3.14159265358979323846;
  CMatrix D = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) D(j, j) = std::polar(0.2 + 0.5 * u(rng), two_pi * u(rng));
  CMatrix U = random_unitary(rng, n);
  CMatrix V = random_unitary(rng, n);
  CMatrix S = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) S(j, j) = 0.75 + 0.6 * u(rng);
  CMatrix W = U * S * V.adjoint();
  return W * D * W.inverse();
}

CMatrix random_peripheral_diag(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix D = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    D(j, j) = std::polar(1.0, 2.0 * 3.14159265358979323846 * u(rng));
  }
  return D;
}

double pair_residual(const BlockTriple& bt, const CMatrix& C00, const CMatrix& C01) {
  double a = op_norm(C00 * bt.T00 - bt.T00 * C00);
  double b = op_norm(bt.T00 * C01 - C01 * bt.T11 - C00 * bt.T01);
  return std::max(a, b);
}

Report run_cesaro(const RunConfig& cfg) {
  if (cfg.input.empty()) throw SchemaError("cesaro: --input is required");
  if (cfg.method != "iterative" && cfg.method != "spectral" && cfg.method != "both") {
    throw SchemaError("cesaro: --method must be iterative, spectral, or both");
  }
  Report r;
  r.scenario = "cesaro";
  r.inputs = inputs_echo(cfg);
  CMatrix T = matrix_from_json(load_json_file(cfg.input), "input");
  if (T.rows() != T.cols()) throw SchemaError("input: matrix must be square");

  PowerBoundedReport cls = classify_power_bounded(T);
  r.values["classification"] = classification_json(cls);
  add_verdict(r.verdicts, "power_bounded", cls.bounded, "DERIVED",
              "spectral radius " + fmt(cls.spectral_radius) + ", sampled power sup " +
                  fmt(cls.empirical_sup));
  if (!cls.bounded) {
    r.values["note"] = "averaging skipped: powers are unbounded";
    return r;
  }

  std::optional<CesaroLimit> it;
  std::optional<CesaroLimit> sp;
  if (cfg.method != "spectral") {
    it = cesaro_limit_iterative(T, cfg.tol, cfg.max_n);
    r.values["iterative"] = json{{"limit", matrix_to_json(it->A)},
                                 {"eigenvalues", hermitian_eigs(it->A)},
                                 {"iterations", it->iterations},
                                 {"warnings", it->warnings}};
    r.certificates["iterative_residual"] = it->residual;
    add_verdict(r.verdicts, "iterative_converged", it->residual <= cfg.tol, "DERIVED",
                "tail gap " + fmt(it->residual) + " after " + std::to_string(it->iterations) +
                    " averaging steps");
  }
  if (cfg.method != "iterative") {
    sp = cesaro_limit_spectral(T);
    std::vector<double> eigs = hermitian_eigs(sp->A);
    r.values["spectral"] = json{{"limit", matrix_to_json(sp->A)},
                                {"eigenvalues", eigs},
                                {"warnings", sp->warnings}};
    r.certificates["spectral_residual"] = sp->residual;
    double top = eigs.back();
    double recip = 0.0;
    int rank = rank_of(sp->A);
    for (double t : eigs) {
      if (t > 1e-8 * top) recip += 1.0 / t;
    }
    r.certificates["reciprocal_sum"] = recip;
    add_verdict(r.verdicts, "trace_law", recip <= rank + 1e-6, "DERIVED",
                "reciprocal eigenvalue sum " + fmt(recip) + " against rank " +
                    std::to_string(rank));
  }
  if (it && sp) {
    double gap = op_norm(it->A - sp->A);
    double budget = std::max(1e-3, 10.0 / static_cast<double>(std::max<long long>(1, it->iterations)));
    r.certificates["route_gap"] = gap;
    add_verdict(r.verdicts, "route_agreement", gap <= budget, "DERIVED",
                "iterative and spectral limits differ by " + fmt(gap) + " (budget " +
                    fmt(budget) + ")");
  }
  return r;
}

Report run_construct(const RunConfig& cfg) {
  if (cfg.values.empty()) throw SchemaError("construct: --values is required");
  for (double v : cfg.values) {
    if (!(v > 0.0)) throw SchemaError("construct: target values must be positive");
  }
  if (cfg.stable_dim < 0) throw SchemaError("construct: --stable-dim must be nonnegative");

  Report r;
  r.scenario = "construct";
  r.inputs = inputs_echo(cfg);

  SpectrumTarget target;
  target.values = cfg.values;
  target.stable_dim = cfg.stable_dim;

  CMatrix T;
  if (cfg.stable_dim == 0) {
    C11Construction c = construct_c11(target, cfg.tol);
    T = c.T;
    r.values["T"] = matrix_to_json(c.T);
    r.values["S"] = matrix_to_json(c.S);
    r.values["U"] = matrix_to_json(c.U);
  } else {
    LStableConstruction c = construct_l_stable(target, cfg.tol);
    T = c.T;
    r.values["T"] = matrix_to_json(c.T);
    r.values["X"] = matrix_to_json(c.X);
  }

  std::vector<double> want = cfg.values;
  for (int i = 0; i < cfg.stable_dim; ++i) want.push_back(0.0);
  std::sort(want.begin(), want.end());
  r.values["target_spectrum"] = want;

  std::vector<double> sp = hermitian_eigs(cesaro_limit_spectral(T).A);
  CesaroLimit itrep = cesaro_limit_iterative(T, 1e-6, cfg.max_n);
  std::vector<double> it = hermitian_eigs(itrep.A);
  double dev_sp = 0.0, dev_it = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    dev_sp = std::max(dev_sp, std::abs(sp[i] - want[i]));
    dev_it = std::max(dev_it, std::abs(it[i] - want[i]));
  }
  r.values["spectral_eigenvalues"] = sp;
  r.values["iterative_eigenvalues"] = it;
  r.certificates["spectral_deviation"] = dev_sp;
  r.certificates["iterative_deviation"] = dev_it;
  add_verdict(r.verdicts, "round_trip_spectral", dev_sp <= std::max(cfg.tol, 1e-12), "DERIVED",
              "limit spectrum off the target by " + fmt(dev_sp));
  add_verdict(r.verdicts, "round_trip_iterative", dev_it <= 1e-3, "DERIVED",
              "averaged spectrum off by " + fmt(dev_it) + " after " +
                  std::to_string(itrep.iterations) + " steps");
  return r;
}

Report run_commutant(const RunConfig& cfg) {
  if (cfg.input.empty()) throw SchemaError("commutant: --input is required");
  if (cfg.random_trials < 0) throw SchemaError("commutant: --random-trials must be nonnegative");
  if (cfg.random_trials > 0 && !cfg.seed) {
    throw SchemaError("commutant: --seed is required for the randomized suite");
  }

  Report r;
  r.scenario = "commutant";
  r.inputs = inputs_echo(cfg);

  json doc = load_json_file(cfg.input);
  for (const char* key : {"T00", "T01", "T11"}) {
    if (!doc.contains(key)) {
      throw SchemaError(std::string("input: missing field \"") + key + "\"");
    }
  }
  BlockTriple bt = make_block_triple(matrix_from_json(doc["T00"], "T00"),
                                     matrix_from_json(doc["T01"], "T01"),
                                     matrix_from_json(doc["T11"], "T11"));
  r.values["contraction"] = bt.contraction;
  r.values["stable_part"] = bt.stable_part;

  CommutantKernel ker = injectivity_kernel(bt);
  json basis = json::array();
  double worst_res = 0.0;
  for (const auto& [C00, C01] : ker.basis) {
    double res = pair_residual(bt, C00, C01);
    worst_res = std::max(worst_res, res);
    basis.push_back({{"c00_norm", op_norm(C00)}, {"c01_norm", op_norm(C01)}, {"residual", res}});
  }
  r.values["kernel"] = json{{"dimension", ker.dimension},
                            {"singular_gap", finite_or_label(ker.singular_gap)},
                            {"basis", std::move(basis)},
                            {"warnings", ker.warnings}};
  r.certificates["worst_basis_residual"] = worst_res;
  add_verdict(r.verdicts, "kernel_basis_intertwines", worst_res <= 1e-7, "DERIVED",
              ker.dimension == 0 ? std::string("trivial kernel, nothing to verify")
                                 : "worst commutation residual " + fmt(worst_res) + " across " +
                                       std::to_string(ker.dimension) + " basis pairs");

  NecessaryConditions nc = necessary_conditions(bt);
  r.values["conditions"] = json{{"intertwining_trivial", nc.intertwining_trivial},
                                {"spectra_meet", nc.spectra_meet},
                                {"point_spectrum_clear", nc.point_spectrum_clear},
                                {"t01_outside_range", nc.t01_outside_range},
                                {"warnings", nc.warnings}};
  add_verdict(r.verdicts, "conditions_consistent", !nc.spectra_meet ? !nc.t01_outside_range : true,
              "DERIVED",
              "disjoint spectra force the coupling equation to be solvable");

  if (cfg.random_trials > 0) {
    std::mt19937 rng(*cfg.seed);
    int with_kernel = 0;
    for (int trial = 0; trial < cfg.random_trials; ++trial) {
      int l = 1 + static_cast<int>(rng() % 3);
      int k = 1 + static_cast<int>(rng() % 3);
      BlockTriple mixed = make_block_triple(random_stable(rng, l), random_matrix(rng, l, k),
                                            random_peripheral_diag(rng, k));
      if (injectivity_kernel(mixed).dimension >= 1) ++with_kernel;
    }
    r.values["random_suite"] =
        json{{"trials", cfg.random_trials}, {"with_kernel", with_kernel}};
    add_verdict(r.verdicts, "mixed_triples_carry_kernel", with_kernel == cfg.random_trials,
                "DERIVED",
                std::to_string(with_kernel) + "/" + std::to_string(cfg.random_trials) +
                    " seeded stable-peripheral triples have nontrivial kernel");
  }
  return r;
}

Report run_lazy(const RunConfig& cfg) {
  if (cfg.op.empty()) throw SchemaError("lazy: --op is required");
  std::string scenario = cfg.op;
  std::string name = "T";
  if (auto colon = cfg.op.find(':'); colon != std::string::npos) {
    scenario = cfg.op.substr(0, colon);
    name = cfg.op.substr(colon + 1);
  }
  OperatorSet set = example_registry(scenario);
  auto it = set.ops.find(name);
  if (it == set.ops.end()) {
    std::string names;
    for (const auto& [k, v] : set.ops) names += (names.empty() ? "" : ", ") + k;
    throw SchemaError("lazy: scenario " + scenario + " has operators: " + names);
  }
  const LazyOperator& T = it->second;

  Report r;
  r.scenario = "lazy";
  r.inputs = inputs_echo(cfg);
  r.values["operator"] = json{{"scenario", scenario},
                              {"name", name},
                              {"description", T.description},
                              {"norm_bound", T.norm_bound},
                              {"has_diagonal_oracle", static_cast<bool>(T.diag_limit)}};
  add_verdict(r.verdicts, "operator_resolved", true, "TRIVIAL", T.description);

  std::optional<FinVec> x;
  if (!cfg.vector_path.empty()) {
    x = finvec_from_json(load_json_file(cfg.vector_path), "vector");
    r.values["vector"] = json{{"support", finvec_to_json(*x)}, {"norm", x->norm()}};
  }

  if (cfg.power > 0) {
    if (!x) throw SchemaError("lazy: --power needs --vector");
    FinVec y = apply_power(T, *x, cfg.power);
    r.values["power_image"] = json{{"n", cfg.power},
                                   {"support", finvec_to_json(y)},
                                   {"support_size", y.support_size()},
                                   {"norm", y.norm()}};
    double budget = std::pow(T.norm_bound, static_cast<double>(cfg.power)) * x->norm();
    add_verdict(r.verdicts, "power_norm_within_bound", y.norm() <= budget * (1.0 + 1e-9),
                "DERIVED",
                "||T^n x|| = " + fmt(y.norm()) + " against the bound " + fmt(budget));
  }

  if (cfg.asymptotic) {
    if (!x) throw SchemaError("lazy: --asymptotic needs --vector");
    json rows = json::array();
    bool bracketed_ok = true;
    for (const auto& [u, c] : x->entries()) {
      json row = index_to_json(u);
      try {
        AsymptoticValue av = asymptotic_diag_value(T, u, cfg.max_n);
        bracketed_ok = bracketed_ok && av.lo <= av.value + 1e-12 && av.value <= av.hi + 1e-12;
        row["value"] = av.value;
        row["lo"] = av.lo;
        row["hi"] = av.hi;
        row["route"] =
            av.route == AsymptoticValue::Route::closed_form ? "closed_form" : "bracketed";
        row["n_used"] = av.n_used;
        if (!av.note.empty()) row["note"] = av.note;
      } catch (const std::invalid_argument& e) {
        bracketed_ok = false;
        row["refused"] = e.what();
      }
      rows.push_back(std::move(row));
    }
    r.values["asymptotics"] = std::move(rows);
    add_verdict(r.verdicts, "asymptotics_bracketed", bracketed_ok, "DERIVED",
                "every diagonal limit sits inside its certified bracket");
  }
  return r;
}

Report run_tree(const RunConfig& cfg) {
  if (cfg.input.empty()) throw SchemaError("tree: --input is required");
  bool analyze = cfg.analyze;
  if (!cfg.analyze && !cfg.asymptote && !cfg.cyclic_vector && !cfg.similarity) analyze = true;

  Report r;
  r.scenario = "tree";
  r.inputs = inputs_echo(cfg);
  TreeShift s = tree_shift_from_json(load_json_file(cfg.input));
  const DirectedTree& t = s.tree;

  if (analyze) {
    long long br = branching_index(t);
    long long cr = corank(s);
    r.values["analyze"] = json{{"norm", s.norm},
                               {"contraction", s.contraction},
                               {"rooted", t.rooted()},
                               {"core_size", t.core_size()},
                               {"tail_count", t.tails.size()},
                               {"leaf_count", tree_leaves(t).size()},
                               {"branching_index", br},
                               {"corank", cr}};
    add_verdict(r.verdicts, "corank_formula", cr == br + (t.rooted() ? 1 : 0), "DERIVED",
                "corank " + std::to_string(cr) + " equals branching index " + std::to_string(br) +
                    (t.rooted() ? " plus one for the root" : ""));
  }

  if (cfg.asymptote) {
    TreeAsymptotics a = analyze_asymptotics(s);
    json alpha_core;
    for (int v = 0; v < t.core_size(); ++v) {
      alpha_core[t.names[static_cast<std::size_t>(v)]] = a.alpha(TreeVertex::Core(v));
    }
    json alpha_tails = json::array();
    for (std::size_t ti = 0; ti < t.tails.size(); ++ti) {
      for (long long step = 1; step <= 3; ++step) {
        alpha_tails.push_back({{"tail", ti},
                               {"step", step},
                               {"alpha", a.alpha(TreeVertex::Tail(static_cast<int>(ti), step))}});
      }
    }
    json asym{{"alpha_core", std::move(alpha_core)},
              {"alpha_tails", std::move(alpha_tails)},
              {"alpha_top", a.alpha_top},
              {"alpha_inf", a.alpha_inf},
              {"c0dot", a.c0dot}};
    if (!t.rooted()) {
      json up = json::array();
      for (long long k = 1; k <= 3; ++k) up.push_back(a.alpha(TreeVertex::Up(k)));
      asym["alpha_up"] = std::move(up);
    }
    if (!a.c0dot) {
      const char* cls = a.cls == AsymptoteCls::unilateral_sum        ? "unilateral_sum"
                        : a.cls == AsymptoteCls::cnu_unilateral_sum ? "cnu_unilateral_sum"
                                                                    : "bilateral_plus";
      asym["classification"] = cls;
      asym["unilateral_count"] = a.unilateral_count;
      asym["asym_corank"] = a.asym_corank ? json(*a.asym_corank) : json("infinite");

      double worst_row = 0.0;
      int rows = 0;
      auto probe = [&](const TreeVertex& v) {
        try {
          double rs = a.beta_row_sum(v);
          worst_row = std::max(worst_row, std::abs(rs - 1.0));
          ++rows;
        } catch (const std::invalid_argument&) {
          // vertex outside the asymptote carrier
        }
      };
      for (int v = 0; v < t.core_size(); ++v) probe(TreeVertex::Core(v));
      for (std::size_t ti = 0; ti < t.tails.size(); ++ti) {
        for (long long step = 1; step <= 3; ++step) {
          probe(TreeVertex::Tail(static_cast<int>(ti), step));
        }
      }
      if (!t.rooted()) {
        for (long long k = 1; k <= 3; ++k) probe(TreeVertex::Up(k));
      }
      r.certificates["isometry_row_defect"] = worst_row;
      add_verdict(r.verdicts, "isometry_rows_sum_to_one", worst_row <= 1e-12, "DERIVED",
                  "worst row-sum defect " + fmt(worst_row) + " over " + std::to_string(rows) +
                      " carrier vertices");
    } else {
      asym["note"] = "alpha vanishes everywhere; no isometric asymptote";
    }
    if (!t.rooted()) {
      try {
        DualAsymptoteReport dual = dual_isometric_asymptote(s);
        json levels = json::array();
        for (const auto& [lvl, av] : dual.a_by_level) levels.push_back({{"level", lvl}, {"a", av}});
        asym["dual"] = json{{"unilateral", dual.unilateral},
                            {"a_by_level", std::move(levels)},
                            {"sampled_norms", dual.sampled_norms}};
        bool unit = true;
        for (double nv : dual.sampled_norms) unit = unit && nv == 1.0;
        add_verdict(r.verdicts, "dual_norms_unit", unit, "DERIVED",
                    "renormalized ancestor vectors have exact unit norm");
      } catch (const std::invalid_argument& e) {
        asym["dual"] = json{{"applicable", false}, {"reason", e.what()}};
      }
    }
    r.values["asymptote"] = std::move(asym);
  }

  if (cfg.similarity) {
    TreeSimilarityReport sim = similarity_flags(s);
    r.values["similarity"] = json{{"shape", sim.shape},
                                  {"similar_to_isometry", sim.similar_to_isometry},
                                  {"similar_to_coisometry", sim.similar_to_coisometry},
                                  {"similar_to_unitary", sim.similar_to_unitary},
                                  {"alpha_inf", sim.alpha_inf},
                                  {"left_product", sim.left_product},
                                  {"total_product", sim.total_product}};
    auto cyc_name = [](CyclicFlag f) {
      return f == CyclicFlag::yes ? "yes" : f == CyclicFlag::no ? "no" : "unknown";
    };
    try {
      LeafTreeReport leaf = leaf_tree_similarity(s);
      r.values["leaf_model"] = json{{"applicable", true},
                                    {"k0", leaf.k0},
                                    {"two_leaves", leaf.two_leaves},
                                    {"g_norm_sq", leaf.g_norm_sq},
                                    {"max_residual", leaf.max_residual},
                                    {"cyclic", cyc_name(leaf.cyclic)},
                                    {"note", leaf.note}};
      add_verdict(r.verdicts, "leaf_model_intertwines", leaf.max_residual <= 1e-9, "DERIVED",
                  "model intertwining residual " + fmt(leaf.max_residual));
    } catch (const std::invalid_argument& e) {
      r.values["leaf_model"] = json{{"applicable", false}, {"reason", e.what()}};
    }
    try {
      TildeTreeReport tilde = tilde_tree_report(s);
      r.values["tilde_model"] =
          json{{"applicable", true},
               {"quasiaffine", tilde.quasiaffine},
               {"ratio_bounded",
                tilde.ratio_bounded ? json(*tilde.ratio_bounded) : json("indeterminate")},
               {"ratio_sup", tilde.ratio_sup},
               {"similar", tilde.similar},
               {"max_residual", tilde.max_residual},
               {"cyclic", cyc_name(tilde.cyclic)},
               {"note", tilde.note}};
      add_verdict(r.verdicts, "tilde_model_quasiaffine",
                  tilde.quasiaffine && tilde.max_residual <= 1e-9, "DERIVED",
                  "norm-ratio model residual " + fmt(tilde.max_residual));
    } catch (const std::invalid_argument& e) {
      r.values["tilde_model"] = json{{"applicable", false}, {"reason", e.what()}};
    }
  }

  if (cfg.cyclic_vector) {
    AdjointCyclicityReport flags = adjoint_cyclicity_flags(s);
    r.values["adjoint_cyclicity"] =
        json{{"c1dot", flags.c1dot},
             {"rooted", flags.rooted},
             {"branching_index", flags.br},
             {"adjoint_cyclic", flags.adjoint_cyclic ? json(*flags.adjoint_cyclic)
                                                     : json("unknown")},
             {"reason", flags.reason}};
    add_verdict(r.verdicts, "cyclicity_flags_consistent",
                !flags.adjoint_cyclic.value_or(false) || (flags.c1dot && s.contraction),
                "TRIVIAL", "asserted adjoint cyclicity implies the theorem hypotheses");

    if (similarity_flags(s).shape == "backward" && t.up_ray) {
      WeightGen g = *t.up_ray;
      BackwardCyclicResult res = backward_cyclic_vector(
          [g](int, long long k) { return g.weight(k); }, 1, cfg.truncation, cfg.depth);
      bool sigma_ok = static_cast<int>(res.sigma.size()) == cfg.depth;
      for (int m = 1; m <= cfg.depth && sigma_ok; ++m) {
        sigma_ok = res.sigma[static_cast<std::size_t>(m - 1)] <= std::ldexp(1.0, -m);
      }
      r.values["cyclic_vector"] = json{{"applicable", true},
                                       {"support_size", res.f.support_size()},
                                       {"sigma", res.sigma},
                                       {"note", res.note}};
      r.certificates["cyclic_sigma"] = res.sigma;
      add_verdict(r.verdicts, "cyclic_certificates", sigma_ok, "DERIVED",
                  "every window certificate sits below its dyadic budget");
    } else {
      r.values["cyclic_vector"] =
          json{{"applicable", false},
               {"reason", "explicit construction applies to a single backward ray"}};
    }
  }
  return r;
}

Report run_repro(const RunConfig& cfg) {
  Report r;
  r.scenario = cfg.scenario.empty() ? "repro" : cfg.scenario;
  r.inputs = inputs_echo(cfg);
  if (cfg.list_only) {
    r.values["scenarios"] = repro_registry();
    add_verdict(r.verdicts, "registry_enumerated", true, "TRIVIAL",
                std::to_string(repro_registry().size()) + " scenarios registered");
    return r;
  }
  if (!cfg.scenario.empty()) {
    run_scenario(cfg.scenario, r.values, r.certificates, r.verdicts);
    return r;
  }
  for (const std::string& id : repro_registry()) {
    json values;
    json certificates;
    std::vector<Verdict> verdicts;
    run_scenario(id, values, certificates, verdicts);
    r.values[id] = std::move(values);
    if (!certificates.is_null()) r.certificates[id] = std::move(certificates);
    for (Verdict& v : verdicts) {
      v.check = id + ":" + v.check;
      r.verdicts.push_back(std::move(v));
    }
  }
  return r;
}

}  // namespace

bool Report::pass() const {
  for (const Verdict& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

json report_to_json(const Report& r) {
  json verdicts = json::array();
  for (const Verdict& v : r.verdicts) {
    verdicts.push_back({{"check", v.check},
                        {"pass", v.pass},
                        {"provenance", v.provenance},
                        {"detail", v.detail}});
  }
  return json{{"scenario", r.scenario},
              {"inputs", r.inputs},
              {"values", r.values},
              {"certificates", r.certificates},
              {"verdicts", std::move(verdicts)},
              {"pass", r.pass()}};
}

std::vector<std::string> repro_registry() {
  return {"ch1_shift_multiplicity", "ch2_coincidence_pair",  "ch2_stable_product_pair",
          "ch3_banach_dependent",   "ch3_no_cesaro",         "ch3_not_power_bounded",
          "ch3_3x3_counterexample", "ch5_counterexample",    "ch6_binary_tree_cnu",
          "ch6_tilde_tree",         "ch6_leaf_tree"};
}

Report run(const RunConfig& cfg) {
  validate_common(cfg);
  if (cfg.subcommand == "cesaro") return run_cesaro(cfg);
  if (cfg.subcommand == "construct") return run_construct(cfg);
  if (cfg.subcommand == "commutant") return run_commutant(cfg);
  if (cfg.subcommand == "lazy") return run_lazy(cfg);
  if (cfg.subcommand == "tree") return run_tree(cfg);
  if (cfg.subcommand == "repro") return run_repro(cfg);
  throw SchemaError("unknown subcommand \"" + cfg.subcommand + "\"");
}

}  // namespace otcli
