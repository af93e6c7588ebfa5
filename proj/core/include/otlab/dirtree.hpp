#pragma once

#include "otlab/lazyop.hpp"
#include "otlab/weightgen.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace otlab {

// Vertex of a tree in the representable family: a finite core, unary infinite
// down-tails hanging from core vertices, and at most one unary infinite
// ancestor ray above the core top. step is the tail depth (>= 1) or the
// ancestor height (>= 1).
struct TreeVertex {
  enum class Kind : std::uint8_t { core, tail, up };
  Kind kind = Kind::core;
  std::int32_t id = 0;
  std::int64_t step = 0;

  friend auto operator<=>(const TreeVertex&, const TreeVertex&) = default;

  static TreeVertex Core(std::int32_t v) { return {Kind::core, v, 0}; }
  static TreeVertex Tail(std::int32_t t, std::int64_t s) { return {Kind::tail, t, s}; }
  static TreeVertex Up(std::int64_t k) { return {Kind::up, 0, k}; }
};

std::string to_string(const TreeVertex& v);

BasisIndex tree_index(const TreeVertex& v, std::int32_t space = 0);
TreeVertex tree_vertex(const BasisIndex& u);

struct DirectedTree {
  struct Tail {
    int attach = 0;       // core vertex the ray hangs from
    WeightGen gen;        // weight of the step-s vertex is gen(s + offset)
    long long offset = 0;
  };

  std::vector<std::string> names;          // core vertex labels
  std::vector<int> parent;                 // -1 marks the top vertex
  std::vector<std::vector<int>> children;  // core children, derived
  int top = 0;
  std::vector<Tail> tails;
  // Ancestor ray weights; gen(0) is the weight of the top vertex itself,
  // gen(k) the weight of the height-k ancestor. Present iff the tree is
  // rootless.
  std::optional<WeightGen> up_ray;

  bool rooted() const { return !up_ray.has_value(); }
  int core_size() const { return static_cast<int>(parent.size()); }

  // Validates connectivity, acyclicity, the single parentless vertex, and
  // tail attach points.
  static DirectedTree build(std::vector<std::string> names, std::vector<int> parent,
                            std::vector<Tail> tails, std::optional<WeightGen> up_ray);
};

bool tree_has_vertex(const DirectedTree& t, const TreeVertex& v);
std::optional<TreeVertex> tree_par(const DirectedTree& t, const TreeVertex& v);
// par^k; error when the chain leaves the tree (rooted case).
TreeVertex tree_par_k(const DirectedTree& t, const TreeVertex& v, long long k);
std::vector<TreeVertex> tree_chi(const DirectedTree& t, const TreeVertex& v);
std::vector<TreeVertex> tree_chi_n(const DirectedTree& t, const TreeVertex& v, long long n);
// Union of Chi^j(par^j(u)) for j <= n, skipping undefined ancestors.
std::vector<TreeVertex> tree_gen_n(const DirectedTree& t, const TreeVertex& v, long long n);
// Level relative to the core top (up-ray vertices are negative).
long long tree_level(const DirectedTree& t, const TreeVertex& v);
std::vector<TreeVertex> tree_level_set(const DirectedTree& t, long long level);
bool tree_is_leaf(const DirectedTree& t, const TreeVertex& v);
std::vector<TreeVertex> tree_leaves(const DirectedTree& t);
// Sum of (#Chi(u) - 1) over non-leaves; finite for the family.
long long branching_index(const DirectedTree& t);

struct TreeShift {
  DirectedTree tree;
  // Weight of each core vertex as a child of its parent; the entry for the
  // top vertex is ignored (rooted: no weight, rootless: up_ray gen(0)).
  std::vector<double> core_weights;
  double norm = 0.0;
  bool contraction = false;

  // Validates positivity and the availability of every tail-product oracle,
  // then computes the exact sup-row norm.
  static TreeShift build(DirectedTree tree, std::vector<double> core_weights);

  double weight(const TreeVertex& v) const;  // lambda_v, v not the root
};

long long corank(const TreeShift& s);

FinVec shift_apply(const TreeShift& s, const FinVec& x);
FinVec shift_apply_adjoint(const TreeShift& s, const FinVec& x);
FinVec shift_apply_power(const TreeShift& s, FinVec x, long long n);
LazyOperator as_lazy_operator(const TreeShift& s);

enum class AsymptoteCls { unilateral_sum, cnu_unilateral_sum, bilateral_plus };
enum class CyclicFlag { yes, no, unknown };

// alpha, beta and the dual family of one shift. Closures share one memo table;
// the isometry row sums reuse the exact child-sum accumulation of the alpha
// recursion, so they are 1 by construction, not within a tolerance.
struct TreeAsymptotics {
  std::function<double(const TreeVertex&)> alpha;
  std::function<bool(const TreeVertex&)> stable;  // alpha == 0
  double alpha_top = 0.0;
  double alpha_inf = 0.0;  // exact infimum over all vertices
  bool c0dot = false;      // alpha vanishes everywhere

  // Isometric asymptote, valid when !c0dot.
  std::function<double(const TreeVertex&)> beta;          // interior of V' only
  std::function<double(const TreeVertex&)> beta_row_sum;  // children inside V'
  AsymptoteCls cls = AsymptoteCls::unilateral_sum;
  long long unilateral_count = 0;          // S+ summands in the model
  std::optional<long long> asym_corank;    // nullopt would mean infinite

  // Dual family, meaningful for rootless trees.
  bool cdot0 = false;  // a vanishes (or the tree is rooted)
  std::function<double(long long)> a_level;
  std::function<FinVec(long long)> h_level;
  bool dual_unilateral = false;  // a last level exists
};

TreeAsymptotics analyze_asymptotics(const TreeShift& s);

double alpha(const TreeShift& s, const TreeVertex& v);

struct DualData {
  double a = 0.0;
  FinVec h;
};

// h_u over Gen(u) with the infinite ancestor products taken from the up-ray
// oracle; errors on rooted trees (the adjoint is then stable).
DualData dual_data(const TreeShift& s, const TreeVertex& u);

// Errors on C_{0.} input (empty asymptote).
TreeAsymptotics isometric_asymptote(const TreeShift& s);

struct DualAsymptoteReport {
  bool unilateral = false;  // last level exists
  std::vector<std::pair<long long, double>> a_by_level;
  // ||U*(h_u / sqrt(a_u))|| on sampled levels; 1 exactly by the shared-sum
  // accumulation.
  std::vector<double> sampled_norms;
};

// Errors on C_{.0} input.
DualAsymptoteReport dual_isometric_asymptote(const TreeShift& s);

struct TreeSimilarityReport {
  bool similar_to_isometry = false;    // inf alpha > 0
  bool similar_to_coisometry = false;  // structural line cases with positive left product
  bool similar_to_unitary = false;     // bilateral line with positive total product
  double alpha_inf = 0.0;
  double left_product = 0.0;   // product over the ancestor direction
  double total_product = 0.0;  // two-sided product on a bilateral line
  std::string shape;           // "bilateral", "backward", "other"
};

TreeSimilarityReport similarity_flags(const TreeShift& s);

struct LeafTreeReport {
  int k0 = 0;              // branch length
  bool two_leaves = false;
  LazyOperator W;          // weighted shift on the line part
  CMatrix N;               // k0 x k0 nilpotent with the norm-ratio weights
  std::function<FinVec(const BasisIndex&)> X;  // model basis -> tree vector
  std::vector<double> g_norm_sq;               // ||g_k||^2, k = 1..k0
  std::vector<double> residual;                // intertwining defect per branch vector
  double max_residual = 0.0;                   // includes sampled line vectors
  CyclicFlag cyclic = CyclicFlag::unknown;
  std::string note;
};

// Similarity model for a rootless tree with Br = 1 and one or two leaves.
// The intertwining X (W (+) N)* = S* X is checked coefficientwise with the
// norm factors cancelled symbolically, so exact weight arithmetic yields
// residual 0, not merely small.
LeafTreeReport leaf_tree_similarity(const TreeShift& s);

struct TildeTreeReport {
  LazyOperator wtilde;            // bilateral part plus norm-ratio unilateral part
  std::vector<double> g_norm_sq;  // ||g_k||^2 up to the report horizon
  std::vector<double> x_span_norms;  // ||X* restricted to span{e_k, e_k'}||
  double x_norm_bound = 2.0;
  std::vector<double> residual;
  double max_residual = 0.0;
  bool quasiaffine = true;   // always holds
  std::optional<bool> ratio_bounded;  // ratio products of branch over trunk
  double ratio_sup = 0.0;
  bool similar = false;
  CyclicFlag cyclic = CyclicFlag::unknown;
  std::string note;
};

// Quasiaffinity and similarity report for the leafless Br = 1 tree.
TildeTreeReport tilde_tree_report(const TreeShift& s, int horizon = 64);

struct BackwardCyclicResult {
  FinVec f;                        // positive coordinates on the schedule
  std::vector<double> sigma;       // final certificates Sigma_1..Sigma_M
  std::vector<int> support_j;      // branch of the l-th support point
  std::vector<long long> support_k;
  std::vector<double> xi;
  int zero_branch = -1;            // branch holding the single allowed zero weight
  long long zero_index = -1;
  std::string note;
};

// Cyclic-vector construction for an orthogonal sum of J weighted backward
// shifts: support schedule k_l = l(l+1)/2 with round-robin branches, tail
// rescaling by 1/sqrt(2^m Sigma_m) until Sigma_m <= 2^{-m} for all m <= M.
// One zero weight splits off a finite Jordan block; two are an error.
BackwardCyclicResult backward_cyclic_vector(const std::function<double(int, long long)>& w,
                                            int J, long long K, int M);

struct AdjointCyclicityReport {
  bool c1dot = false;
  bool rooted = false;
  long long br = 0;
  std::optional<bool> adjoint_cyclic;  // asserted only under the two theorems
  std::string reason;
};

AdjointCyclicityReport adjoint_cyclicity_flags(const TreeShift& s);

struct BinaryTreeReport {
  double beta = 0.0;        // uniform child weight of the preset
  bool isometry = false;
  double alpha_value = 0.0; // alpha is constant on the preset
  double a_value = 0.0;     // 0 exactly: completely nonunitary
  bool cnu = false;
  std::optional<long long> asym_corank;  // nullopt: infinite
  // Spine variant: one two-sided path reweighted with exp(-1/(|l|+1)^2).
  double spine_lower_bound = 0.0;  // certified positive a bound at the l = 0 vertex
  bool spine_cnu = false;
};

// The rootless binary tree with uniform weights 1/sqrt(2) lies outside the
// finite-level family; its asymptotics are closed-form and hard-coded.
BinaryTreeReport binary_tree_preset();

}  // namespace otlab
