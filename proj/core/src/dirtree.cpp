#include "otlab/dirtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

namespace otlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> tails_at(const DirectedTree& t, int v) {
  std::vector<int> out;
  for (std::size_t i = 0; i < t.tails.size(); ++i) {
    if (t.tails[i].attach == v) out.push_back(static_cast<int>(i));
  }
  return out;
}

int vertex_degree(const DirectedTree& t, int v) {
  return static_cast<int>(t.children[v].size() + tails_at(t, v).size());
}

void require_vertex(const DirectedTree& t, const TreeVertex& v, const char* who) {
  if (!tree_has_vertex(t, v)) {
    throw std::invalid_argument(std::string(who) + ": vertex not in the tree: " + to_string(v));
  }
}

}  // namespace

std::string to_string(const TreeVertex& v) {
  std::ostringstream os;
  switch (v.kind) {
    case TreeVertex::Kind::core:
      os << "v" << v.id;
      break;
    case TreeVertex::Kind::tail:
      os << "t" << v.id << "+" << v.step;
      break;
    case TreeVertex::Kind::up:
      os << "p" << v.step;
      break;
  }
  return os.str();
}

BasisIndex tree_index(const TreeVertex& v, std::int32_t space) {
  std::int64_t packed = (static_cast<std::int64_t>(v.kind) << 32) |
                        static_cast<std::int64_t>(static_cast<std::uint32_t>(v.id));
  BasisIndex u;
  u.tag = BasisIndex::Tag::tree;
  u.space = space;
  u.a = packed;
  u.b = v.step;
  return u;
}

TreeVertex tree_vertex(const BasisIndex& u) {
  if (u.tag != BasisIndex::Tag::tree) {
    throw std::invalid_argument("otlab::tree_vertex: index does not carry a tree vertex");
  }
  TreeVertex v;
  v.kind = static_cast<TreeVertex::Kind>(u.a >> 32);
  v.id = static_cast<std::int32_t>(u.a & 0xffffffffLL);
  v.step = u.b;
  return v;
}

DirectedTree DirectedTree::build(std::vector<std::string> names, std::vector<int> parent,
                                 std::vector<Tail> tails, std::optional<WeightGen> up_ray) {
  const int n = static_cast<int>(parent.size());
  if (n == 0 || names.size() != parent.size()) {
    throw std::invalid_argument("otlab::DirectedTree: names and parents must agree and be nonempty");
  }
  DirectedTree t;
  t.names = std::move(names);
  t.parent = std::move(parent);
  t.tails = std::move(tails);
  t.up_ray = std::move(up_ray);
  t.children.assign(n, {});
  int top = -1;
  for (int i = 0; i < n; ++i) {
    int p = t.parent[i];
    if (p == -1) {
      if (top != -1) {
        throw std::invalid_argument("otlab::DirectedTree: exactly one vertex may lack a parent");
      }
      top = i;
    } else {
      if (p < 0 || p >= n || p == i) {
        throw std::invalid_argument("otlab::DirectedTree: parent index out of range");
      }
      t.children[p].push_back(i);
    }
  }
  if (top == -1) {
    throw std::invalid_argument("otlab::DirectedTree: a parentless top vertex is required");
  }
  t.top = top;
  for (int i = 0; i < n; ++i) {
    int v = i, steps = 0;
    while (v != top) {
      v = t.parent[v];
      if (++steps > n) {
        throw std::invalid_argument("otlab::DirectedTree: parent pointers contain a cycle");
      }
    }
  }
  for (const Tail& tl : t.tails) {
    if (tl.attach < 0 || tl.attach >= n) {
      throw std::invalid_argument("otlab::DirectedTree: tail attach point out of range");
    }
  }
  return t;
}

bool tree_has_vertex(const DirectedTree& t, const TreeVertex& v) {
  switch (v.kind) {
    case TreeVertex::Kind::core:
      return v.id >= 0 && v.id < t.core_size() && v.step == 0;
    case TreeVertex::Kind::tail:
      return v.id >= 0 && v.id < static_cast<int>(t.tails.size()) && v.step >= 1;
    case TreeVertex::Kind::up:
      return t.up_ray.has_value() && v.id == 0 && v.step >= 1;
  }
  return false;
}

std::optional<TreeVertex> tree_par(const DirectedTree& t, const TreeVertex& v) {
  require_vertex(t, v, "otlab::tree_par");
  switch (v.kind) {
    case TreeVertex::Kind::core:
      if (v.id == t.top) {
        if (t.rooted()) return std::nullopt;
        return TreeVertex::Up(1);
      }
      return TreeVertex::Core(t.parent[v.id]);
    case TreeVertex::Kind::tail:
      if (v.step == 1) return TreeVertex::Core(t.tails[v.id].attach);
      return TreeVertex::Tail(v.id, v.step - 1);
    case TreeVertex::Kind::up:
      return TreeVertex::Up(v.step + 1);
  }
  return std::nullopt;
}

TreeVertex tree_par_k(const DirectedTree& t, const TreeVertex& v, long long k) {
  if (k < 0) {
    throw std::invalid_argument("otlab::tree_par_k: negative ancestor height");
  }
  require_vertex(t, v, "otlab::tree_par_k");
  TreeVertex cur = v;
  while (k > 0) {
    if (cur.kind == TreeVertex::Kind::up) return TreeVertex::Up(cur.step + k);
    if (cur.kind == TreeVertex::Kind::tail && k < cur.step) {
      return TreeVertex::Tail(cur.id, cur.step - k);
    }
    auto p = tree_par(t, cur);
    if (!p) {
      throw std::invalid_argument("otlab::tree_par_k: the ancestor chain leaves the tree");
    }
    cur = *p;
    --k;
  }
  return cur;
}

std::vector<TreeVertex> tree_chi(const DirectedTree& t, const TreeVertex& v) {
  require_vertex(t, v, "otlab::tree_chi");
  std::vector<TreeVertex> out;
  switch (v.kind) {
    case TreeVertex::Kind::core:
      for (int c : t.children[v.id]) out.push_back(TreeVertex::Core(c));
      for (int tl : tails_at(t, v.id)) out.push_back(TreeVertex::Tail(tl, 1));
      break;
    case TreeVertex::Kind::tail:
      out.push_back(TreeVertex::Tail(v.id, v.step + 1));
      break;
    case TreeVertex::Kind::up:
      out.push_back(v.step == 1 ? TreeVertex::Core(t.top) : TreeVertex::Up(v.step - 1));
      break;
  }
  return out;
}

std::vector<TreeVertex> tree_chi_n(const DirectedTree& t, const TreeVertex& v, long long n) {
  if (n < 0) {
    throw std::invalid_argument("otlab::tree_chi_n: negative depth");
  }
  require_vertex(t, v, "otlab::tree_chi_n");
  std::vector<TreeVertex> frontier{v};
  for (long long j = 0; j < n; ++j) {
    std::vector<TreeVertex> next;
    for (const TreeVertex& u : frontier) {
      for (const TreeVertex& c : tree_chi(t, u)) next.push_back(c);
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

std::vector<TreeVertex> tree_gen_n(const DirectedTree& t, const TreeVertex& v, long long n) {
  if (n < 0) {
    throw std::invalid_argument("otlab::tree_gen_n: negative height");
  }
  require_vertex(t, v, "otlab::tree_gen_n");
  std::set<TreeVertex> acc;
  for (long long j = 0; j <= n; ++j) {
    TreeVertex anc;
    try {
      anc = tree_par_k(t, v, j);
    } catch (const std::invalid_argument&) {
      break;
    }
    for (const TreeVertex& u : tree_chi_n(t, anc, j)) acc.insert(u);
  }
  return {acc.begin(), acc.end()};
}

long long tree_level(const DirectedTree& t, const TreeVertex& v) {
  require_vertex(t, v, "otlab::tree_level");
  switch (v.kind) {
    case TreeVertex::Kind::up:
      return -v.step;
    case TreeVertex::Kind::tail:
      return tree_level(t, TreeVertex::Core(t.tails[v.id].attach)) + v.step;
    case TreeVertex::Kind::core: {
      long long d = 0;
      int u = v.id;
      while (u != t.top) {
        u = t.parent[u];
        ++d;
      }
      return d;
    }
  }
  return 0;
}

std::vector<TreeVertex> tree_level_set(const DirectedTree& t, long long level) {
  std::vector<TreeVertex> out;
  if (level < 0) {
    if (t.up_ray) out.push_back(TreeVertex::Up(-level));
    return out;
  }
  for (int v = 0; v < t.core_size(); ++v) {
    if (tree_level(t, TreeVertex::Core(v)) == level) out.push_back(TreeVertex::Core(v));
  }
  for (std::size_t i = 0; i < t.tails.size(); ++i) {
    long long d = tree_level(t, TreeVertex::Core(t.tails[i].attach));
    if (d < level) out.push_back(TreeVertex::Tail(static_cast<int>(i), level - d));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool tree_is_leaf(const DirectedTree& t, const TreeVertex& v) {
  require_vertex(t, v, "otlab::tree_is_leaf");
  return v.kind == TreeVertex::Kind::core && vertex_degree(t, v.id) == 0;
}

std::vector<TreeVertex> tree_leaves(const DirectedTree& t) {
  std::vector<TreeVertex> out;
  for (int v = 0; v < t.core_size(); ++v) {
    if (vertex_degree(t, v) == 0) out.push_back(TreeVertex::Core(v));
  }
  return out;
}

long long branching_index(const DirectedTree& t) {
  long long br = 0;
  for (int v = 0; v < t.core_size(); ++v) {
    int d = vertex_degree(t, v);
    if (d >= 1) br += d - 1;
  }
  return br;
}

TreeShift TreeShift::build(DirectedTree tree, std::vector<double> core_weights) {
  if (core_weights.size() != tree.parent.size()) {
    throw std::invalid_argument("otlab::TreeShift: one weight per core vertex is required");
  }
  auto check_custom = [](const WeightGen& g, const char* what) {
    if (g.kind == WeightGen::Kind::custom &&
        (!g.declared_tail.has_value() || *g.declared_tail != 1.0)) {
      throw std::invalid_argument(std::string("otlab::TreeShift: ") + what +
                                  " with a custom generator needs a declared unit tail");
    }
  };
  for (int v = 0; v < static_cast<int>(core_weights.size()); ++v) {
    if (v == tree.top) continue;
    if (!(core_weights[v] > 0.0) || !std::isfinite(core_weights[v])) {
      throw std::invalid_argument("otlab::TreeShift: core weights must be positive and finite");
    }
  }
  if (tree.up_ray) {
    check_custom(*tree.up_ray, "an ancestor ray");
    double w0 = tree.up_ray->weight(0);
    if (!(w0 > 0.0) || !std::isfinite(w0)) {
      throw std::invalid_argument("otlab::TreeShift: the top weight must be positive and finite");
    }
    if (!tree.up_ray->tail_product(0).has_value()) {
      throw std::invalid_argument("otlab::TreeShift: the ancestor ray needs its product oracle");
    }
  }
  for (const DirectedTree::Tail& tl : tree.tails) {
    check_custom(tl.gen, "a tail");
    double w1 = tl.gen.weight(1 + tl.offset);
    if (!(w1 > 0.0) || !std::isfinite(w1)) {
      throw std::invalid_argument("otlab::TreeShift: tail weights must be positive and finite");
    }
    if (!tl.gen.tail_product(1 + tl.offset).has_value()) {
      throw std::invalid_argument("otlab::TreeShift: every tail needs its product oracle");
    }
  }

  TreeShift s;
  s.tree = std::move(tree);
  s.core_weights = std::move(core_weights);

  double norm_sq = 0.0;
  for (int v = 0; v < s.tree.core_size(); ++v) {
    double row = 0.0;
    for (int c : s.tree.children[v]) row += s.core_weights[c] * s.core_weights[c];
    for (int tl : tails_at(s.tree, v)) {
      double w = s.tree.tails[tl].gen.weight(1 + s.tree.tails[tl].offset);
      row += w * w;
    }
    norm_sq = std::max(norm_sq, row);
  }
  double norm = std::sqrt(norm_sq);
  for (const DirectedTree::Tail& tl : s.tree.tails) {
    norm = std::max(norm, tl.gen.sup_from(2 + tl.offset));
  }
  if (s.tree.up_ray) norm = std::max(norm, s.tree.up_ray->sup_from(0));
  s.norm = norm;
  s.contraction = norm <= 1.0 + 1e-12;
  return s;
}

double TreeShift::weight(const TreeVertex& v) const {
  require_vertex(tree, v, "otlab::TreeShift::weight");
  switch (v.kind) {
    case TreeVertex::Kind::core:
      if (v.id == tree.top) {
        if (tree.rooted()) {
          throw std::invalid_argument("otlab::TreeShift::weight: the root carries no incoming edge");
        }
        return tree.up_ray->weight(0);
      }
      return core_weights[v.id];
    case TreeVertex::Kind::tail:
      return tree.tails[v.id].gen.weight(v.step + tree.tails[v.id].offset);
    case TreeVertex::Kind::up:
      return tree.up_ray->weight(v.step);
  }
  throw std::logic_error("otlab::TreeShift::weight: bad vertex kind");
}

long long corank(const TreeShift& s) {
  return branching_index(s.tree) + (s.tree.rooted() ? 1 : 0);
}

FinVec shift_apply(const TreeShift& s, const FinVec& x) {
  FinVec out;
  for (const auto& [u, xi] : x.entries()) {
    TreeVertex v = tree_vertex(u);
    require_vertex(s.tree, v, "otlab::shift_apply");
    for (const TreeVertex& c : tree_chi(s.tree, v)) {
      out.add(tree_index(c, u.space), xi * s.weight(c));
    }
  }
  return out;
}

FinVec shift_apply_adjoint(const TreeShift& s, const FinVec& x) {
  FinVec out;
  for (const auto& [u, xi] : x.entries()) {
    TreeVertex v = tree_vertex(u);
    require_vertex(s.tree, v, "otlab::shift_apply_adjoint");
    auto p = tree_par(s.tree, v);
    if (!p) continue;
    out.add(tree_index(*p, u.space), xi * s.weight(v));
  }
  return out;
}

FinVec shift_apply_power(const TreeShift& s, FinVec x, long long n) {
  if (n < 0) {
    throw std::invalid_argument("otlab::shift_apply_power: power must be nonnegative");
  }
  for (long long j = 0; j < n; ++j) x = shift_apply(s, x);
  return x;
}

LazyOperator as_lazy_operator(const TreeShift& s) {
  auto sp = std::make_shared<TreeShift>(s);
  LazyOperator T;
  std::ostringstream os;
  os << "weighted shift on a directed tree, core size " << s.tree.core_size() << ", "
     << s.tree.tails.size() << " tails, " << (s.tree.rooted() ? "rooted" : "rootless");
  T.description = os.str();
  T.norm_bound = s.norm;
  T.accepts = [sp](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::tree && u.space == 0 && tree_has_vertex(sp->tree, tree_vertex(u));
  };
  T.apply_basis = [sp](const BasisIndex& u) { return shift_apply(*sp, FinVec::basis(u)); };
  T.adjoint_basis = [sp](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::tree || u.space != 0 || !tree_has_vertex(sp->tree, tree_vertex(u))) {
      throw std::invalid_argument("otlab::as_lazy_operator: index outside the adjoint domain");
    }
    return shift_apply_adjoint(*sp, FinVec::basis(u));
  };
  T.diag_limit = [sp](const BasisIndex& u) -> std::optional<double> {
    try {
      return alpha(*sp, tree_vertex(u));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  return T;
}

namespace {

// Shared computation state behind the asymptotics closures.
struct AsymState {
  TreeShift s;
  std::map<TreeVertex, double> memo;
  std::map<long long, FinVec> h_memo;
  std::map<long long, double> a_memo;
  std::vector<double> core_anc;   // product of core weights up to (not including) the top
  std::vector<long long> core_lvl;
  double utp0 = 1.0;  // full ancestor-ray product, rootless only

  explicit AsymState(const TreeShift& shift) : s(shift) {
    const int n = s.tree.core_size();
    core_anc.assign(n, 1.0);
    core_lvl.assign(n, 0);
    for (int v = 0; v < n; ++v) {
      double p = 1.0;
      long long l = 0;
      int u = v;
      while (u != s.tree.top) {
        p *= s.core_weights[u];
        u = s.tree.parent[u];
        ++l;
      }
      core_anc[v] = p;
      core_lvl[v] = l;
    }
    if (s.tree.up_ray) utp0 = s.tree.up_ray->tail_product(0).value();
  }

  double tail_alpha(int t, long long step) {
    const auto& tl = s.tree.tails[t];
    auto tp = tl.gen.tail_product(step + 1 + tl.offset);
    if (!tp.has_value() || !std::isfinite(*tp)) {
      throw std::invalid_argument("otlab::analyze_asymptotics: tail products must be finite");
    }
    return *tp * *tp;
  }

  // The single accumulation both alpha and the isometry row sums run through.
  double core_child_sum(int v) {
    double sum = 0.0;
    for (int c : s.tree.children[v]) {
      double w = s.core_weights[c];
      sum += w * w * alpha(TreeVertex::Core(c));
    }
    for (int t : tails_at(s.tree, v)) {
      double w = s.tree.tails[t].gen.weight(1 + s.tree.tails[t].offset);
      sum += w * w * alpha(TreeVertex::Tail(t, 1));
    }
    return sum;
  }

  double alpha(const TreeVertex& v) {
    auto it = memo.find(v);
    if (it != memo.end()) return it->second;
    double val = 0.0;
    switch (v.kind) {
      case TreeVertex::Kind::tail:
        val = tail_alpha(v.id, v.step);
        break;
      case TreeVertex::Kind::core:
        val = core_child_sum(v.id);
        break;
      case TreeVertex::Kind::up: {
        TreeVertex child = v.step == 1 ? TreeVertex::Core(s.tree.top) : TreeVertex::Up(v.step - 1);
        double w = s.weight(child);
        val = w * w * alpha(child);
        break;
      }
    }
    memo.emplace(v, val);
    return val;
  }

  const FinVec& h_level(long long l) {
    auto it = h_memo.find(l);
    if (it != h_memo.end()) return it->second;
    if (s.tree.rooted()) {
      throw std::invalid_argument("otlab::analyze_asymptotics: the dual family needs a rootless tree");
    }
    if (!std::isfinite(utp0)) {
      throw std::invalid_argument("otlab::analyze_asymptotics: ancestor products must be finite");
    }
    FinVec h;
    if (l < 0) {
      double tp = s.tree.up_ray->tail_product(-l).value();
      h.add(tree_index(TreeVertex::Up(-l)), tp);
    } else {
      for (int v = 0; v < s.tree.core_size(); ++v) {
        if (core_lvl[v] == l) h.add(tree_index(TreeVertex::Core(v)), core_anc[v] * utp0);
      }
      for (std::size_t t = 0; t < s.tree.tails.size(); ++t) {
        const auto& tl = s.tree.tails[t];
        long long d = core_lvl[tl.attach];
        if (d < l) {
          long long step = l - d;
          double p = tl.gen.partial_product(1 + tl.offset, step + tl.offset);
          h.add(tree_index(TreeVertex::Tail(static_cast<int>(t), step)),
                core_anc[tl.attach] * utp0 * p);
        }
      }
    }
    return h_memo.emplace(l, std::move(h)).first->second;
  }

  double a_level(long long l) {
    auto it = a_memo.find(l);
    if (it != a_memo.end()) return it->second;
    double a = h_level(l).norm_sq();
    a_memo.emplace(l, a);
    return a;
  }
};

// Exact infimum over s >= 1 of the squared tail products of one hanging ray.
double tail_alpha_inf(const WeightGen& g, long long off) {
  switch (g.kind) {
    case WeightGen::Kind::constant:
    case WeightGen::Kind::geometric:
    case WeightGen::Kind::run_indicator: {
      auto tp = g.tail_product(std::max<long long>(2 + off, 0));
      if (!tp || !std::isfinite(*tp)) {
        throw std::invalid_argument("otlab::analyze_asymptotics: tail products must be finite");
      }
      return *tp * *tp;
    }
    case WeightGen::Kind::telescoping:
    case WeightGen::Kind::exp_inv_square: {
      double tp = g.tail_product(2 + off).value();
      return tp * tp;  // the products increase along these rays
    }
    case WeightGen::Kind::table_then_constant: {
      if (g.c != 1.0) {
        double tp = g.tail_product(2 + off).value();
        if (!std::isfinite(tp)) {
          throw std::invalid_argument("otlab::analyze_asymptotics: tail products must be finite");
        }
        return tp * tp;  // 0 beyond every start index
      }
      double lo = 1.0;
      long long hi = g.table.empty() ? 2 + off : g.table.rbegin()->first + 1;
      if (hi - (2 + off) > 1000000LL) {
        throw std::invalid_argument("otlab::analyze_asymptotics: table span too large");
      }
      for (long long i = 2 + off; i <= std::max(hi, 2 + off); ++i) {
        double tp = g.tail_product(i).value();
        lo = std::min(lo, tp * tp);
      }
      return lo;
    }
    case WeightGen::Kind::custom: {
      double lo = 1.0;
      long long hi = g.table.empty() ? 2 + off : g.table.rbegin()->first + 1;
      if (hi - (2 + off) > 1000000LL) {
        throw std::invalid_argument("otlab::analyze_asymptotics: table span too large");
      }
      for (long long i = 2 + off; i <= std::max(hi, 2 + off); ++i) {
        auto tp = g.tail_product(i);
        if (tp) lo = std::min(lo, *tp * *tp);
      }
      return lo;
    }
  }
  throw std::logic_error("otlab::tail_alpha_inf: bad kind");
}

// Exact infimum over k >= 1 of the ancestor-ray partial products gen(0)...gen(k-1).
double up_partial_inf(const WeightGen& g) {
  switch (g.kind) {
    case WeightGen::Kind::constant:
      if (g.c < 1.0) return 0.0;
      return g.c == 1.0 ? 1.0 : g.c;
    case WeightGen::Kind::geometric:
      return g.c < 1.0 ? 0.0 : 1.0;
    case WeightGen::Kind::run_indicator:
      if (g.c < 1.0) return 0.0;
      return 1.0;
    case WeightGen::Kind::exp_inv_square:
      return g.tail_product(0).value();  // the partials decrease to the full product
    case WeightGen::Kind::table_then_constant:
    case WeightGen::Kind::custom: {
      double tail = g.kind == WeightGen::Kind::table_then_constant ? g.c : 1.0;
      long long hi = g.table.empty() ? 1 : std::max<long long>(1, g.table.rbegin()->first + 2);
      if (hi > 1000000LL) {
        throw std::invalid_argument("otlab::analyze_asymptotics: table span too large");
      }
      double p = 1.0, lo = kInf;
      for (long long k = 1; k <= hi; ++k) {
        p *= g.weight(k - 1);
        lo = std::min(lo, p);
      }
      if (tail < 1.0) return 0.0;
      return lo;
    }
    case WeightGen::Kind::telescoping:
      break;
  }
  throw std::invalid_argument("otlab::analyze_asymptotics: unsupported ancestor-ray generator");
}

}  // namespace

TreeAsymptotics analyze_asymptotics(const TreeShift& s) {
  auto st = std::make_shared<AsymState>(s);

  for (int v = 0; v < s.tree.core_size(); ++v) st->alpha(TreeVertex::Core(v));
  double alpha_top = st->alpha(TreeVertex::Core(s.tree.top));

  TreeAsymptotics out;
  out.alpha = [st](const TreeVertex& v) {
    require_vertex(st->s.tree, v, "otlab::TreeAsymptotics::alpha");
    return st->alpha(v);
  };
  out.stable = [st](const TreeVertex& v) {
    require_vertex(st->s.tree, v, "otlab::TreeAsymptotics::stable");
    return st->alpha(v) == 0.0;
  };
  out.alpha_top = alpha_top;
  out.c0dot = alpha_top == 0.0;

  {
    double inf = kInf;
    for (int v = 0; v < s.tree.core_size(); ++v) {
      inf = std::min(inf, st->alpha(TreeVertex::Core(v)));
    }
    for (const auto& tl : s.tree.tails) inf = std::min(inf, tail_alpha_inf(tl.gen, tl.offset));
    if (s.tree.up_ray && alpha_top > 0.0) {
      double q = up_partial_inf(*s.tree.up_ray);
      inf = std::min(inf, q * q * alpha_top);
    }
    out.alpha_inf = inf;
  }

  out.beta = [st](const TreeVertex& v) {
    require_vertex(st->s.tree, v, "otlab::TreeAsymptotics::beta");
    double av = st->alpha(v);
    auto p = tree_par(st->s.tree, v);
    if (av <= 0.0 || !p || st->alpha(*p) <= 0.0) {
      throw std::invalid_argument("otlab::TreeAsymptotics::beta: vertex outside the asymptote tree");
    }
    return st->s.weight(v) * std::sqrt(av) / std::sqrt(st->alpha(*p));
  };
  out.beta_row_sum = [st](const TreeVertex& v) {
    require_vertex(st->s.tree, v, "otlab::TreeAsymptotics::beta_row_sum");
    double au = st->alpha(v);
    if (au <= 0.0) {
      throw std::invalid_argument("otlab::TreeAsymptotics::beta_row_sum: vertex outside the asymptote tree");
    }
    double sum = 0.0;
    switch (v.kind) {
      case TreeVertex::Kind::core:
        sum = st->core_child_sum(v.id);
        break;
      case TreeVertex::Kind::tail: {
        const auto& tl = st->s.tree.tails[v.id];
        double w = tl.gen.weight(v.step + 1 + tl.offset);
        sum = w * w * st->alpha(TreeVertex::Tail(v.id, v.step + 1));
        break;
      }
      case TreeVertex::Kind::up: {
        TreeVertex child =
            v.step == 1 ? TreeVertex::Core(st->s.tree.top) : TreeVertex::Up(v.step - 1);
        double w = st->s.weight(child);
        sum = w * w * st->alpha(child);
        break;
      }
    }
    return sum / au;
  };

  if (out.c0dot) {
    out.cls = AsymptoteCls::unilateral_sum;
    out.unilateral_count = 0;
    out.asym_corank = 0;
  } else {
    long long brv = 0;
    for (int v = 0; v < s.tree.core_size(); ++v) {
      if (st->alpha(TreeVertex::Core(v)) <= 0.0) continue;
      int d = 0;
      for (int c : s.tree.children[v]) {
        if (st->alpha(TreeVertex::Core(c)) > 0.0) ++d;
      }
      for (int t : tails_at(s.tree, v)) {
        if (st->alpha(TreeVertex::Tail(t, 1)) > 0.0) ++d;
      }
      if (d >= 1) brv += d - 1;
    }
    if (s.tree.rooted()) {
      out.cls = AsymptoteCls::unilateral_sum;
      out.unilateral_count = brv + 1;
    } else {
      // The unary ancestor ray makes the asymptote's own ancestor products
      // telescope to 1, so the cnu class never occurs for this family.
      out.cls = AsymptoteCls::bilateral_plus;
      out.unilateral_count = brv;
    }
    out.asym_corank = out.unilateral_count;
  }

  out.cdot0 = s.tree.rooted() || st->utp0 == 0.0;
  out.a_level = [st](long long l) { return st->a_level(l); };
  out.h_level = [st](long long l) { return st->h_level(l); };
  out.dual_unilateral = !s.tree.rooted() && s.tree.tails.empty();
  return out;
}

double alpha(const TreeShift& s, const TreeVertex& v) {
  require_vertex(s.tree, v, "otlab::alpha");
  AsymState st(s);
  return st.alpha(v);
}

DualData dual_data(const TreeShift& s, const TreeVertex& u) {
  if (s.tree.rooted()) {
    throw std::invalid_argument("otlab::dual_data: the adjoint of a rooted shift is stable");
  }
  require_vertex(s.tree, u, "otlab::dual_data");
  AsymState st(s);
  DualData out;
  out.h = st.h_level(tree_level(s.tree, u));
  out.a = out.h.norm_sq();
  return out;
}

TreeAsymptotics isometric_asymptote(const TreeShift& s) {
  TreeAsymptotics a = analyze_asymptotics(s);
  if (a.c0dot) {
    throw std::invalid_argument("otlab::isometric_asymptote: the shift is stable; the asymptote is empty");
  }
  return a;
}

DualAsymptoteReport dual_isometric_asymptote(const TreeShift& s) {
  TreeAsymptotics a = analyze_asymptotics(s);
  if (a.cdot0) {
    throw std::invalid_argument("otlab::dual_isometric_asymptote: the adjoint is stable; no dual asymptote");
  }
  DualAsymptoteReport rep;
  rep.unilateral = a.dual_unilateral;
  long long lmax = 0;
  for (int v = 0; v < s.tree.core_size(); ++v) {
    lmax = std::max(lmax, tree_level(s.tree, TreeVertex::Core(v)));
  }
  if (!s.tree.tails.empty()) lmax += 8;
  for (long long l = -8; l <= lmax; ++l) {
    double av = a.a_level(l);
    rep.a_by_level.emplace_back(l, av);
    if (av > 0.0) rep.sampled_norms.push_back(a.h_level(l).norm() / std::sqrt(av));
  }
  return rep;
}

TreeSimilarityReport similarity_flags(const TreeShift& s) {
  TreeAsymptotics a = analyze_asymptotics(s);
  TreeSimilarityReport rep;
  rep.alpha_inf = a.alpha_inf;
  rep.similar_to_isometry = a.alpha_inf > 0.0;

  bool rootless = !s.tree.rooted();
  long long br = branching_index(s.tree);
  auto leaves = tree_leaves(s.tree);
  rep.left_product = rootless ? s.tree.up_ray->tail_product(0).value() : 0.0;

  if (rootless && br == 0 && leaves.empty()) {
    rep.shape = "bilateral";
    double p = rep.left_product;
    int v = s.tree.top;
    while (true) {
      const auto& ch = s.tree.children[v];
      if (ch.empty()) break;
      v = ch.front();
      p *= s.core_weights[v];
    }
    const auto& tl = s.tree.tails[tails_at(s.tree, v).front()];
    p *= tl.gen.tail_product(1 + tl.offset).value();
    rep.total_product = p;
    rep.similar_to_unitary = p > 0.0;
    rep.similar_to_coisometry = p > 0.0;
  } else if (rootless && br == 0 && leaves.size() == 1) {
    rep.shape = "backward";
    rep.total_product = 0.0;
    rep.similar_to_coisometry = rep.left_product > 0.0;
  } else {
    rep.shape = "other";
  }
  return rep;
}

namespace {

// One descending chain hanging from the branch vertex: a finite core prefix,
// then either a leaf end or a tail continuing forever.
struct Chain {
  std::vector<TreeVertex> verts;
  std::vector<double> weights;
  bool infinite = false;
  int tail = -1;

  long long prefix() const { return static_cast<long long>(verts.size()); }

  double weight_at(const TreeShift& s, long long k) const {
    if (k >= 1 && k <= prefix()) return weights[k - 1];
    if (infinite && k > prefix()) {
      const auto& tl = s.tree.tails[tail];
      return tl.gen.weight(k - prefix() + tl.offset);
    }
    throw std::invalid_argument("otlab: chain index beyond the leaf");
  }

  TreeVertex vertex_at(long long k) const {
    if (k >= 1 && k <= prefix()) return verts[k - 1];
    if (infinite && k > prefix()) return TreeVertex::Tail(tail, k - prefix());
    throw std::invalid_argument("otlab: chain index beyond the leaf");
  }

  long long length() const {  // -1 when infinite
    return infinite ? -1 : prefix();
  }
};

Chain walk_chain(const TreeShift& s, const TreeVertex& start) {
  Chain ch;
  TreeVertex cur = start;
  while (true) {
    if (cur.kind == TreeVertex::Kind::tail) {
      ch.infinite = true;
      ch.tail = cur.id;
      return ch;
    }
    ch.verts.push_back(cur);
    ch.weights.push_back(s.weight(cur));
    auto kids = tree_chi(s.tree, cur);
    if (kids.empty()) return ch;
    if (kids.size() > 1) {
      throw std::invalid_argument("otlab: a second branch vertex below the first");
    }
    cur = kids.front();
  }
}

int find_branch_vertex(const TreeShift& s, const char* who) {
  if (s.tree.rooted()) {
    throw std::invalid_argument(std::string(who) + ": a rootless tree is required");
  }
  if (branching_index(s.tree) != 1) {
    throw std::invalid_argument(std::string(who) + ": branching index 1 is required");
  }
  for (int v = 0; v < s.tree.core_size(); ++v) {
    if (vertex_degree(s.tree, v) == 2) return v;
  }
  throw std::invalid_argument(std::string(who) + ": no branch vertex found");
}

std::pair<Chain, Chain> branch_chains(const TreeShift& s, int b) {
  std::vector<TreeVertex> kids = tree_chi(s.tree, TreeVertex::Core(b));
  return {walk_chain(s, kids[0]), walk_chain(s, kids[1])};
}

// Weight of the trunk vertex at line coordinate n <= 0 (the branch vertex is 0).
double upline_weight(const TreeShift& s, int b, long long n) {
  return s.weight(tree_par_k(s.tree, TreeVertex::Core(b), -n));
}

CyclicFlag cyclic_hint(const TreeShift& s) {
  if (corank(s) >= 2) return CyclicFlag::no;
  bool rootless = !s.tree.rooted();
  long long br = branching_index(s.tree);
  auto leaves = tree_leaves(s.tree);
  if (rootless && br == 1 && leaves.size() == 2) return CyclicFlag::yes;
  if (rootless && br == 1 && leaves.size() == 1 && s.contraction &&
      s.tree.up_ray->tail_product(0).value() > 0.0) {
    return CyclicFlag::yes;
  }
  if (!rootless && br == 0) return CyclicFlag::yes;
  if (rootless && br == 0 && leaves.empty() && s.contraction) {
    TreeSimilarityReport sim = similarity_flags(s);
    if (sim.total_product > 0.0) return CyclicFlag::yes;
  }
  if (s.contraction) {
    try {
      TreeAsymptotics a = analyze_asymptotics(s);
      bool c1dot = !a.c0dot;
      for (int v = 0; v < s.tree.core_size() && c1dot; ++v) {
        if (a.alpha(TreeVertex::Core(v)) <= 0.0) c1dot = false;
      }
      for (const auto& tl : s.tree.tails) {
        if (!(tl.gen.tail_product(1 + tl.offset).value() > 0.0)) c1dot = false;
      }
      if (c1dot) {
        bool asym_cyclic =
            (a.cls == AsymptoteCls::unilateral_sum && a.unilateral_count <= 1) ||
            (a.cls == AsymptoteCls::bilateral_plus && a.unilateral_count == 0);
        if (!asym_cyclic) return CyclicFlag::no;
      }
    } catch (const std::exception&) {
      // no verdict without asymptotics
    }
  }
  return CyclicFlag::unknown;
}

}  // namespace

LeafTreeReport leaf_tree_similarity(const TreeShift& s) {
  int b = find_branch_vertex(s, "otlab::leaf_tree_similarity");
  auto [ca, cb] = branch_chains(s, b);
  if (ca.infinite && cb.infinite) {
    throw std::invalid_argument("otlab::leaf_tree_similarity: no leaf; use the leafless model");
  }

  Chain line, branch;
  bool two_leaves;
  if (!ca.infinite && !cb.infinite) {
    two_leaves = true;
    if (ca.length() >= cb.length()) {
      line = ca;
      branch = cb;
    } else {
      line = cb;
      branch = ca;
    }
  } else {
    two_leaves = false;
    line = ca.infinite ? ca : cb;
    branch = ca.infinite ? cb : ca;
  }
  const long long k0 = branch.length();
  const long long j0 = line.length();  // -1 in the one-leaf case

  LeafTreeReport rep;
  rep.k0 = static_cast<int>(k0);
  rep.two_leaves = two_leaves;

  std::vector<double> c(k0 + 1, 1.0), d(k0 + 1, 1.0);
  rep.g_norm_sq.resize(k0);
  rep.residual.resize(k0);
  for (long long k = 1; k <= k0; ++k) {
    double lw = line.weight_at(s, k);
    double bw = branch.weight_at(s, k);
    c[k] = c[k - 1] / lw;
    d[k] = d[k - 1] / bw;
    rep.g_norm_sq[k - 1] = c[k] * c[k] + d[k] * d[k];
    if (k == 1) {
      rep.residual[0] = std::abs(c[1] * lw - d[1] * bw);
    } else {
      rep.residual[k - 1] = std::abs(c[k] * lw - c[k - 1]) + std::abs(d[k] * bw - d[k - 1]);
    }
  }

  rep.N = CMatrix::Zero(k0, k0);
  for (long long k = 1; k < k0; ++k) {
    rep.N(k, k - 1) = std::sqrt(rep.g_norm_sq[k - 1] / rep.g_norm_sq[k]);
  }

  auto sp = std::make_shared<TreeShift>(s);
  auto line_sp = std::make_shared<Chain>(line);
  auto branch_sp = std::make_shared<Chain>(branch);
  auto c_sp = std::make_shared<std::vector<double>>(c);
  auto d_sp = std::make_shared<std::vector<double>>(d);
  auto gns = std::make_shared<std::vector<double>>(rep.g_norm_sq);
  const int bvert = b;

  auto line_weight = [sp, line_sp, bvert](long long n) {
    return n >= 1 ? line_sp->weight_at(*sp, n) : upline_weight(*sp, bvert, n);
  };
  auto line_vertex = [sp, line_sp, bvert](long long n) {
    return n >= 1 ? line_sp->vertex_at(n) : tree_par_k(sp->tree, TreeVertex::Core(bvert), -n);
  };

  LazyOperator W;
  W.description = two_leaves ? "weighted shift on the line part, cut at the far leaf"
                             : "bilateral weighted shift on the line part";
  W.norm_bound = s.norm;
  W.accepts = [j0, two_leaves](const BasisIndex& u) {
    return u.tag == BasisIndex::Tag::integer && u.space == 0 && (!two_leaves || u.a <= j0);
  };
  W.apply_basis = [line_weight, j0, two_leaves](const BasisIndex& u) {
    if (two_leaves && u.a == j0) return FinVec{};
    return FinVec::basis(BasisIndex::Int(u.a + 1), line_weight(u.a + 1));
  };
  W.adjoint_basis = [line_weight, j0, two_leaves](const BasisIndex& u) {
    if (u.tag != BasisIndex::Tag::integer || u.space != 0 || (two_leaves && u.a > j0)) {
      throw std::invalid_argument("otlab::leaf_tree_similarity: index outside the adjoint domain");
    }
    return FinVec::basis(BasisIndex::Int(u.a - 1), line_weight(u.a));
  };
  rep.W = W;

  rep.X = [line_vertex, branch_sp, c_sp, d_sp, gns, k0](const BasisIndex& u) {
    if (u.tag == BasisIndex::Tag::integer && u.space == 0) {
      return FinVec::basis(tree_index(line_vertex(u.a)));
    }
    if (u.tag == BasisIndex::Tag::natural && u.space == 1 && u.a >= 1 && u.a <= k0) {
      long long k = u.a;
      double nrm = std::sqrt((*gns)[k - 1]);
      FinVec g;
      g.add(tree_index(line_vertex(k)), (*c_sp)[k] / nrm);
      g.add(tree_index(branch_sp->vertex_at(k)), -(*d_sp)[k] / nrm);
      return g;
    }
    throw std::invalid_argument("otlab::leaf_tree_similarity: index outside the model space");
  };

  double mr = 0.0;
  for (double r : rep.residual) mr = std::max(mr, r);
  for (long long n = -3; n <= std::min<long long>(5, two_leaves ? j0 : 5); ++n) {
    FinVec lhs = shift_apply_adjoint(s, rep.X(BasisIndex::Int(n)));
    FinVec rhs = line_weight(n) * FinVec::basis(tree_index(line_vertex(n - 1)));
    mr = std::max(mr, (lhs - rhs).norm());
  }
  rep.max_residual = mr;

  rep.cyclic = cyclic_hint(s);
  std::ostringstream os;
  os << (two_leaves ? "two leaves; the shorter chain is the nilpotent part"
                    : "one leaf; the infinite chain is the line part")
     << "; branch length " << k0;
  rep.note = os.str();
  return rep;
}

namespace {

// Growable running products 1/lambda along the two chains of the leafless model.
struct TildeState {
  TreeShift s;
  Chain line, branch;
  std::vector<double> c{1.0}, d{1.0}, gns{0.0};

  void extend(long long k) {
    if (k > 1000000LL) {
      throw std::runtime_error("otlab::tilde_tree_report: branch index beyond the supported range");
    }
    while (static_cast<long long>(c.size()) <= k) {
      long long j = static_cast<long long>(c.size());
      c.push_back(c[j - 1] / line.weight_at(s, j));
      d.push_back(d[j - 1] / branch.weight_at(s, j));
      gns.push_back(c[j] * c[j] + d[j] * d[j]);
    }
  }

  double wprime(long long k) {  // ||g_{k-1}|| / ||g_k||, k >= 2
    extend(k);
    return std::sqrt(gns[k - 1] / gns[k]);
  }
};

struct RatioVerdict {
  std::optional<bool> bounded;
  double sup = 0.0;
  std::string note;
};

// Eventual behavior of one chain: a constant value, or weights rising to 1
// from below with a positive certified tail product.
struct EventualKind {
  bool rising = false;
  double value = 1.0;
  bool supported = true;
  long long stable_from = 1;  // chain index after which the behavior holds
};

EventualKind eventual_kind(const TreeShift& s, const Chain& ch) {
  EventualKind ek;
  const auto& tl = s.tree.tails[ch.tail];
  const auto& gen = tl.gen;
  long long pre = ch.prefix();
  switch (gen.kind) {
    case WeightGen::Kind::constant:
      ek.value = gen.c;
      ek.stable_from = pre + 1;
      break;
    case WeightGen::Kind::table_then_constant:
      ek.value = gen.c;
      ek.stable_from =
          pre + 1 + (gen.table.empty() ? 0 : std::max<long long>(0, gen.table.rbegin()->first - tl.offset));
      break;
    case WeightGen::Kind::custom:
      ek.value = 1.0;
      ek.stable_from =
          pre + 1 + (gen.table.empty() ? 0 : std::max<long long>(0, gen.table.rbegin()->first - tl.offset));
      break;
    case WeightGen::Kind::telescoping:
    case WeightGen::Kind::exp_inv_square:
      ek.rising = true;
      ek.stable_from = pre + 1;
      break;
    default:
      ek.supported = false;
      break;
  }
  return ek;
}

// Product of the chain weights from index i on, mapped through the tail oracle.
double chain_tail_product(const TreeShift& s, const Chain& ch, long long i) {
  const auto& tl = s.tree.tails[ch.tail];
  long long pre = ch.prefix();
  double p = 1.0;
  for (long long k = i; k <= pre; ++k) p *= ch.weight_at(s, k);
  long long start = std::max(i, pre + 1);
  return p * tl.gen.tail_product(start - pre + tl.offset).value();
}

RatioVerdict ratio_analysis(const TreeShift& s, const Chain& trunk, const Chain& branch) {
  RatioVerdict out;
  EventualKind et = eventual_kind(s, trunk);
  EventualKind eb = eventual_kind(s, branch);
  if (!et.supported || !eb.supported) {
    out.note = "ratio analysis supports eventually constant and rising-to-1 chains only";
    return out;
  }
  long long kstar = std::max(et.stable_from, eb.stable_from);
  long long kenum = std::min<long long>(std::max<long long>(kstar + 32, 40), 100000);

  // Past the enumerated range a constant branch below a rising trunk still
  // needs the trunk weights above the branch value before products decay.
  if (et.rising && !eb.rising && eb.value < 1.0) {
    while (kenum < 1000000 && trunk.weight_at(s, kenum + 1) <= eb.value) kenum += 64;
  }
  if (eb.rising && !et.rising && et.value > 1.0) {
    while (kenum < 1000000 && branch.weight_at(s, kenum + 1) >= et.value) kenum += 64;
  }

  double r = 1.0, sup = 0.0;
  for (long long k = 1; k <= kenum; ++k) {
    r *= branch.weight_at(s, k) / trunk.weight_at(s, k);
    sup = std::max(sup, r);
  }

  bool unbounded;
  double beyond = sup;
  if (!et.rising && !eb.rising) {
    unbounded = eb.value > et.value;
  } else if (et.rising && !eb.rising) {
    unbounded = eb.value > 1.0;
    if (!unbounded && eb.value == 1.0) {
      beyond = std::max(sup, r / chain_tail_product(s, trunk, kenum + 1));
    }
  } else if (!et.rising && eb.rising) {
    unbounded = et.value < 1.0;
  } else {
    unbounded = false;
    beyond = std::max(sup, r / chain_tail_product(s, trunk, kenum + 1));
  }
  out.bounded = !unbounded;
  out.sup = unbounded ? kInf : beyond;
  out.note = unbounded ? "branch-over-trunk products diverge"
                       : "branch-over-trunk products bounded; the supremum bound is certified";
  return out;
}

}  // namespace

TildeTreeReport tilde_tree_report(const TreeShift& s, int horizon) {
  if (horizon < 4 || horizon > 100000) {
    throw std::invalid_argument("otlab::tilde_tree_report: horizon out of range");
  }
  int b = find_branch_vertex(s, "otlab::tilde_tree_report");
  auto [ca, cb] = branch_chains(s, b);
  if (!ca.infinite || !cb.infinite) {
    throw std::invalid_argument("otlab::tilde_tree_report: the leafless model needs two infinite chains");
  }

  RatioVerdict va = ratio_analysis(s, ca, cb);
  RatioVerdict vb = ratio_analysis(s, cb, ca);
  bool swapped = false;
  RatioVerdict chosen = va;
  if (!(va.bounded.has_value() && *va.bounded)) {
    if (vb.bounded.has_value() && *vb.bounded) {
      swapped = true;
      chosen = vb;
    } else if (!va.bounded.has_value() && vb.bounded.has_value()) {
      swapped = true;
      chosen = vb;
    }
  }
  Chain trunk = swapped ? cb : ca;
  Chain branch = swapped ? ca : cb;

  auto st = std::make_shared<TildeState>();
  st->s = s;
  st->line = trunk;
  st->branch = branch;
  st->extend(horizon + 1);

  TildeTreeReport rep;
  rep.g_norm_sq.assign(st->gns.begin() + 1, st->gns.begin() + horizon + 1);
  rep.residual.resize(horizon);
  rep.x_span_norms.resize(horizon);
  for (long long k = 1; k <= horizon; ++k) {
    double lw = trunk.weight_at(s, k);
    double bw = branch.weight_at(s, k);
    if (k == 1) {
      rep.residual[0] = std::abs(st->c[1] * lw - st->d[1] * bw);
    } else {
      rep.residual[k - 1] =
          std::abs(st->c[k] * lw - st->c[k - 1]) + std::abs(st->d[k] * bw - st->d[k - 1]);
    }
    double nrm = std::sqrt(st->gns[k]);
    double a = st->c[k] / nrm;
    double bb = st->d[k] / nrm;
    double t = 1.0 + a * a + bb * bb;
    double smax_sq = (t + std::sqrt(std::max(0.0, t * t - 4.0 * bb * bb))) / 2.0;
    rep.x_span_norms[k - 1] = std::sqrt(smax_sq);
  }
  rep.max_residual = 0.0;
  for (double r : rep.residual) rep.max_residual = std::max(rep.max_residual, r);

  const int bvert = b;
  auto sp = std::make_shared<TreeShift>(s);
  auto trunk_sp = std::make_shared<Chain>(trunk);
  auto line_weight = [sp, trunk_sp, bvert](long long n) {
    return n >= 1 ? trunk_sp->weight_at(*sp, n) : upline_weight(*sp, bvert, n);
  };

  LazyOperator wt;
  wt.description = "bilateral trunk shift plus the norm-ratio unilateral branch shift";
  wt.norm_bound = std::max(s.norm, 1.0);
  wt.accepts = [](const BasisIndex& u) {
    return (u.tag == BasisIndex::Tag::integer && u.space == 0) ||
           (u.tag == BasisIndex::Tag::natural && u.space == 1 && u.a >= 1);
  };
  wt.apply_basis = [line_weight, st](const BasisIndex& u) {
    if (u.tag == BasisIndex::Tag::integer) {
      return FinVec::basis(BasisIndex::Int(u.a + 1), line_weight(u.a + 1));
    }
    return FinVec::basis(BasisIndex::Nat(u.a + 1, 1), st->wprime(u.a + 1));
  };
  wt.adjoint_basis = [line_weight, st](const BasisIndex& u) {
    if (u.tag == BasisIndex::Tag::integer && u.space == 0) {
      return FinVec::basis(BasisIndex::Int(u.a - 1), line_weight(u.a));
    }
    if (u.tag == BasisIndex::Tag::natural && u.space == 1 && u.a >= 1) {
      if (u.a == 1) return FinVec{};
      return FinVec::basis(BasisIndex::Nat(u.a - 1, 1), st->wprime(u.a));
    }
    throw std::invalid_argument("otlab::tilde_tree_report: index outside the adjoint domain");
  };
  rep.wtilde = wt;

  rep.ratio_bounded = chosen.bounded;
  rep.ratio_sup = chosen.sup;
  rep.similar = chosen.bounded.has_value() && *chosen.bounded;
  rep.cyclic = cyclic_hint(s);
  std::ostringstream os;
  os << (swapped ? "chains swapped so the bounded orientation is the trunk; " : "") << chosen.note;
  rep.note = os.str();
  return rep;
}

BackwardCyclicResult backward_cyclic_vector(const std::function<double(int, long long)>& w, int J,
                                            long long K, int M) {
  if (!w) {
    throw std::invalid_argument("otlab::backward_cyclic_vector: weight callback is required");
  }
  if (J < 1 || J > 64) {
    throw std::invalid_argument("otlab::backward_cyclic_vector: branch count out of range");
  }
  if (K < 1 || K > 200000) {
    throw std::invalid_argument("otlab::backward_cyclic_vector: truncation out of range");
  }
  if (M < 1 || M > 48) {
    throw std::invalid_argument("otlab::backward_cyclic_vector: certificate count out of range");
  }

  int zb = -1;
  long long zi = -1;
  for (int j = 0; j < J; ++j) {
    for (long long i = 0; i <= K; ++i) {
      double v = w(j, i);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("otlab::backward_cyclic_vector: weights must be nonnegative and finite");
      }
      if (v == 0.0) {
        if (zb != -1) {
          throw std::invalid_argument("otlab::backward_cyclic_vector: more than one zero weight");
        }
        zb = j;
        zi = i;
      }
    }
  }
  auto wr = [&w, zb, zi](int j, long long i) {
    return j == zb ? w(j, zi + 1 + i) : w(j, i);
  };
  long long Keff = zb >= 0 ? K - zi - 1 : K;
  if (Keff < 1) {
    throw std::invalid_argument("otlab::backward_cyclic_vector: the zero weight leaves no room");
  }

  long long L = 0;
  while ((L + 1) * (L + 2) / 2 <= Keff) ++L;
  if (L < M + 1) {
    throw std::invalid_argument("otlab::backward_cyclic_vector: truncation too small for the certificates");
  }
  auto k_of = [](long long l) { return l * (l + 1) / 2; };

  // P[l][k]: product of the k weights stepped over when B^k hits the l-th
  // support point; row l covers k = 0..k_l.
  std::vector<std::vector<double>> P(L + 1);
  std::vector<int> jl(L + 1, 0);
  for (long long l = 1; l <= L; ++l) {
    jl[l] = static_cast<int>((l - 1) % J);
    long long kl = k_of(l);
    P[l].assign(kl + 1, 1.0);
    for (long long k = 1; k <= kl; ++k) {
      P[l][k] = P[l][k - 1] * wr(jl[l], kl - k);
      if (!(P[l][k] > 1e-300) || !(P[l][k] < 1e300)) {
        throw std::invalid_argument(
            "otlab::backward_cyclic_vector: weight window products leave the representable range");
      }
    }
  }

  std::vector<double> xi(L + 1, 1.0);
  auto sigma_of = [&](int m) {
    long long lo = m == 1 ? 0 : k_of(m - 1) + 1;
    long long hi = k_of(m);
    double worst = 0.0;
    for (long long k = lo; k <= hi; ++k) {
      double denom = xi[m] * P[m][k];
      double sum = 0.0;
      for (long long l = m + 1; l <= L; ++l) {
        double ratio = xi[l] * P[l][k] / denom;
        sum += ratio * ratio;
      }
      worst = std::max(worst, sum);
    }
    return worst;
  };

  for (int m = 1; m <= M; ++m) {
    double sm = sigma_of(m);
    double target = std::ldexp(1.0, -m);
    if (sm > target) {
      double factor = std::sqrt(std::ldexp(sm, m) * (1.0 + 1e-12));
      for (long long l = m + 1; l <= L; ++l) xi[l] /= factor;
    }
  }

  BackwardCyclicResult out;
  out.sigma.resize(M);
  for (int m = 1; m <= M; ++m) {
    out.sigma[m - 1] = sigma_of(m);
    if (out.sigma[m - 1] > std::ldexp(1.0, -m)) {
      throw std::runtime_error("otlab::backward_cyclic_vector: certificate failed after rescaling");
    }
  }
  for (long long l = 1; l <= L; ++l) {
    long long k_orig = jl[l] == zb ? zi + 1 + k_of(l) : k_of(l);
    out.f.add(BasisIndex::Pair(jl[l], k_orig), xi[l]);
    out.support_j.push_back(jl[l]);
    out.support_k.push_back(k_orig);
    out.xi.push_back(xi[l]);
  }
  out.zero_branch = zb;
  out.zero_index = zi;
  std::ostringstream os;
  os << "support schedule k_l = l(l+1)/2 over " << L << " points, round-robin across " << J
     << " branches";
  if (zb >= 0) {
    out.f.add(BasisIndex::Pair(zb, zi), 1.0);
    os << "; branch " << zb << " split at its zero weight (index " << zi
       << "): certificates live in the repaired coordinates and the finite block's top vector was added";
  }
  out.note = os.str();
  return out;
}

AdjointCyclicityReport adjoint_cyclicity_flags(const TreeShift& s) {
  AdjointCyclicityReport rep;
  rep.rooted = s.tree.rooted();
  rep.br = branching_index(s.tree);
  bool c1dot = true;
  try {
    TreeAsymptotics a = analyze_asymptotics(s);
    for (int v = 0; v < s.tree.core_size() && c1dot; ++v) {
      if (a.alpha(TreeVertex::Core(v)) <= 0.0) c1dot = false;
    }
    for (const auto& tl : s.tree.tails) {
      if (!(tl.gen.tail_product(1 + tl.offset).value() > 0.0)) c1dot = false;
    }
  } catch (const std::exception&) {
    c1dot = false;
  }
  rep.c1dot = c1dot;
  if (s.contraction && c1dot) {
    rep.adjoint_cyclic = true;
    rep.reason = "contraction with nowhere-vanishing forward asymptotics and finite branching";
  } else {
    rep.adjoint_cyclic = std::nullopt;
    rep.reason = s.contraction ? "the forward asymptotics vanish somewhere; nothing is asserted"
                               : "not a contraction; nothing is asserted";
  }
  return rep;
}

BinaryTreeReport binary_tree_preset() {
  BinaryTreeReport rep;
  rep.beta = std::sqrt(0.5);
  rep.isometry = true;
  rep.alpha_value = 1.0;
  rep.a_value = 0.0;
  rep.cnu = true;
  rep.asym_corank = std::nullopt;  // one surplus direction per vertex, infinitely many
  rep.spine_lower_bound = std::exp(-2.0 * inv_square_tail_sum(0));
  rep.spine_cnu = false;
  return rep;
}

}  // namespace otlab
