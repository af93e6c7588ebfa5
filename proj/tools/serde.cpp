#include "serde.hpp"

#include <fstream>
#include <sstream>

namespace otcli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

double need_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

long long need_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

const json& need_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::map<long long, double> table_from_json(const json& j, const std::string& where) {
  std::map<long long, double> table;
  if (j.is_object()) {
    for (const auto& [key, val] : j.items()) {
      long long idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoll(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        fail(where + "." + key, "table keys must be integers");
      }
      table[idx] = need_number(val, where + "." + key);
    }
    return table;
  }
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& row = j[i];
      std::string at = where + "[" + std::to_string(i) + "]";
      if (!row.is_array() || row.size() != 2) fail(at, "expected an [index, weight] pair");
      table[need_integer(row[0], at)] = need_number(row[1], at);
    }
    return table;
  }
  fail(where, "expected a table object or an array of pairs");
}

int resolve_vertex(const json& j, const std::vector<std::string>& names,
                   const std::string& where) {
  if (j.is_number_integer()) {
    long long idx = j.get<long long>();
    if (idx < 0 || idx >= static_cast<long long>(names.size())) {
      fail(where, "vertex index " + std::to_string(idx) + " out of range");
    }
    return static_cast<int>(idx);
  }
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    fail(where, "unknown vertex \"" + name + "\"");
  }
  fail(where, "expected a vertex index or name");
}

void csv_walk(const json& j, const std::string& path, std::ostringstream& out) {
  auto emit = [&out, &path](const std::string& value) {
    std::string field = path.empty() ? "." : path;
    bool quote = value.find_first_of(",\"\n") != std::string::npos;
    out << field << ',';
    if (quote) {
      out << '"';
      for (char c : value) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      out << value;
    }
    out << '\n';
  };
  switch (j.type()) {
    case json::value_t::object:
      for (const auto& [key, val] : j.items()) {
        csv_walk(val, path.empty() ? key : path + "." + key, out);
      }
      break;
    case json::value_t::array:
      for (std::size_t i = 0; i < j.size(); ++i) {
        csv_walk(j[i], path + "[" + std::to_string(i) + "]", out);
      }
      break;
    case json::value_t::null:
      emit("null");
      break;
    case json::value_t::string:
      emit(j.get<std::string>());
      break;
    default:
      emit(j.dump());
      break;
  }
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

otlab::CMatrix matrix_from_json(const json& j, const std::string& where) {
  long long rows = need_integer(need_field(j, "rows", where), where + ".rows");
  long long cols = need_integer(need_field(j, "cols", where), where + ".cols");
  if (rows < 1 || cols < 1) fail(where, "rows and cols must be positive");
  const json& data = need_field(j, "data", where);
  if (!data.is_array() || static_cast<long long>(data.size()) != rows * cols) {
    fail(where + ".data", "expected " + std::to_string(rows * cols) + " [re, im] entries");
  }
  otlab::CMatrix M(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    for (long long c = 0; c < cols; ++c) {
      const json& cell = data[static_cast<std::size_t>(r * cols + c)];
      std::string at = where + ".data[" + std::to_string(r * cols + c) + "]";
      if (!cell.is_array() || cell.size() != 2) fail(at, "expected an [re, im] pair");
      M(r, c) = otlab::Complex(need_number(cell[0], at), need_number(cell[1], at));
    }
  }
  return M;
}

json matrix_to_json(const otlab::CMatrix& M) {
  json data = json::array();
  for (long long r = 0; r < M.rows(); ++r) {
    for (long long c = 0; c < M.cols(); ++c) {
      data.push_back({M(r, c).real(), M(r, c).imag()});
    }
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

otlab::WeightGen weightgen_from_json(const json& j, const std::string& where) {
  const std::string kind = [&] {
    const json& k = need_field(j, "kind", where);
    if (!k.is_string()) fail(where + ".kind", "expected a string");
    return k.get<std::string>();
  }();
  if (kind == "constant") {
    return otlab::WeightGen::constant_gen(
        need_number(need_field(j, "value", where), where + ".value"));
  }
  if (kind == "table_then_constant") {
    std::optional<double> left;
    if (j.contains("left")) left = need_number(j["left"], where + ".left");
    return otlab::WeightGen::table_then_constant_gen(
        table_from_json(need_field(j, "table", where), where + ".table"),
        need_number(need_field(j, "tail", where), where + ".tail"), left);
  }
  if (kind == "telescoping") {
    long long j0 = 2;
    if (j.contains("j0")) j0 = need_integer(j["j0"], where + ".j0");
    return otlab::WeightGen::telescoping_gen(j0);
  }
  if (kind == "geometric") {
    return otlab::WeightGen::geometric_gen(
        need_number(need_field(j, "ratio", where), where + ".ratio"));
  }
  if (kind == "run_indicator") {
    return otlab::WeightGen::run_indicator_gen(
        need_integer(need_field(j, "base", where), where + ".base"),
        need_number(need_field(j, "value", where), where + ".value"));
  }
  if (kind == "exp_inv_square") return otlab::WeightGen::exp_inv_square_gen();
  if (kind == "custom") {
    std::optional<double> tail;
    if (j.contains("declared_tail") && !j["declared_tail"].is_null()) {
      tail = need_number(j["declared_tail"], where + ".declared_tail");
    }
    return otlab::WeightGen::custom_gen(
        table_from_json(need_field(j, "table", where), where + ".table"), tail);
  }
  fail(where + ".kind", "unknown weight family \"" + kind + "\"");
}

otlab::TreeShift tree_shift_from_json(const json& j) {
  const json& jv = need_field(j, "vertices", "tree");
  if (!jv.is_array() || jv.empty()) fail("tree.vertices", "expected a nonempty array");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < jv.size(); ++i) {
    if (!jv[i].is_string()) fail("tree.vertices[" + std::to_string(i) + "]", "expected a name");
    names.push_back(jv[i].get<std::string>());
  }

  std::vector<int> parent(names.size(), -1);
  const json& je = need_field(j, "edges", "tree");
  if (!je.is_array()) fail("tree.edges", "expected an array of [parent, child] pairs");
  for (std::size_t i = 0; i < je.size(); ++i) {
    std::string at = "tree.edges[" + std::to_string(i) + "]";
    const json& e = je[i];
    if (!e.is_array() || e.size() != 2) fail(at, "expected a [parent, child] pair");
    int p = resolve_vertex(e[0], names, at + "[0]");
    int c = resolve_vertex(e[1], names, at + "[1]");
    if (parent[c] != -1) fail(at, "vertex \"" + names[c] + "\" already has a parent");
    parent[c] = p;
  }

  if (j.contains("root")) {
    int r = resolve_vertex(j["root"], names, "tree.root");
    if (parent[r] != -1) fail("tree.root", "declared root has an incoming edge");
  }

  std::vector<otlab::DirectedTree::Tail> tails;
  if (j.contains("tails")) {
    const json& jt = j["tails"];
    if (!jt.is_array()) fail("tree.tails", "expected an array");
    for (std::size_t i = 0; i < jt.size(); ++i) {
      std::string at = "tree.tails[" + std::to_string(i) + "]";
      otlab::DirectedTree::Tail t;
      t.attach = resolve_vertex(need_field(jt[i], "attach", at), names, at + ".attach");
      t.gen = weightgen_from_json(need_field(jt[i], "gen", at), at + ".gen");
      if (jt[i].contains("offset")) t.offset = need_integer(jt[i]["offset"], at + ".offset");
      tails.push_back(std::move(t));
    }
  }

  std::optional<otlab::WeightGen> up;
  if (j.contains("up_ray") && !j["up_ray"].is_null()) {
    up = weightgen_from_json(j["up_ray"], "tree.up_ray");
  }

  otlab::DirectedTree tree =
      otlab::DirectedTree::build(names, std::move(parent), std::move(tails), std::move(up));

  const json& jw = need_field(j, "weights", "tree");
  std::vector<double> weights(names.size(), 1.0);
  std::vector<bool> seen(names.size(), false);
  if (jw.is_array()) {
    if (jw.size() != names.size()) fail("tree.weights", "expected one weight per vertex");
    for (std::size_t i = 0; i < jw.size(); ++i) {
      weights[i] = need_number(jw[i], "tree.weights[" + std::to_string(i) + "]");
      seen[i] = true;
    }
  } else if (jw.is_object()) {
    for (const auto& [key, val] : jw.items()) {
      int v = resolve_vertex(json(key), names, "tree.weights." + key);
      weights[v] = need_number(val, "tree.weights." + key);
      seen[v] = true;
    }
  } else {
    fail("tree.weights", "expected an object keyed by vertex or an array");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    // The top vertex of a rooted tree carries no weight; any other gap is an
    // input error.
    if (!seen[i] && !(tree.rooted() && static_cast<int>(i) == tree.top)) {
      fail("tree.weights", "missing weight for vertex \"" + names[i] + "\"");
    }
  }
  return otlab::TreeShift::build(std::move(tree), std::move(weights));
}

otlab::BasisIndex index_from_json(const json& j, const std::string& where) {
  const json& jt = need_field(j, "tag", where);
  if (!jt.is_string()) fail(where + ".tag", "expected a string");
  const std::string tag = jt.get<std::string>();
  std::int32_t space = 0;
  if (j.contains("space")) {
    space = static_cast<std::int32_t>(need_integer(j["space"], where + ".space"));
  }
  long long a = need_integer(need_field(j, "a", where), where + ".a");
  if (tag == "integer") return otlab::BasisIndex::Int(a, space);
  if (tag == "natural") return otlab::BasisIndex::Nat(a, space);
  if (tag == "pair") {
    long long b = need_integer(need_field(j, "b", where), where + ".b");
    return otlab::BasisIndex::Pair(a, b, space);
  }
  fail(where + ".tag", "unsupported index tag \"" + tag + "\"");
}

json index_to_json(const otlab::BasisIndex& u) {
  json out;
  switch (u.tag) {
    case otlab::BasisIndex::Tag::integer:
      out["tag"] = "integer";
      out["a"] = u.a;
      break;
    case otlab::BasisIndex::Tag::natural:
      out["tag"] = "natural";
      out["a"] = u.a;
      break;
    case otlab::BasisIndex::Tag::pair:
      out["tag"] = "pair";
      out["a"] = u.a;
      out["b"] = u.b;
      break;
    case otlab::BasisIndex::Tag::tree:
      out["tag"] = "tree";
      out["a"] = u.a;
      out["b"] = u.b;
      break;
  }
  if (u.space != 0) out["space"] = u.space;
  return out;
}

otlab::FinVec finvec_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of support entries");
  otlab::FinVec x;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string at = where + "[" + std::to_string(i) + "]";
    double re = need_number(need_field(j[i], "re", at), at + ".re");
    double im = 0.0;
    if (j[i].contains("im")) im = need_number(j[i]["im"], at + ".im");
    x.add(index_from_json(j[i], at), otlab::Complex(re, im));
  }
  return x;
}

json finvec_to_json(const otlab::FinVec& x) {
  json out = json::array();
  for (const auto& [u, c] : x.entries()) {
    json entry = index_to_json(u);
    entry["re"] = c.real();
    entry["im"] = c.imag();
    out.push_back(std::move(entry));
  }
  return out;
}

json complex_to_json(const otlab::Complex& z) { return json{z.real(), z.imag()}; }

std::string csv_flatten(const json& report) {
  std::ostringstream out;
  out << "field,value\n";
  csv_walk(report, "", out);
  return out.str();
}

}  // namespace otcli
