#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "otlab/dirtree.hpp"
#include "otlab/lazyop.hpp"
#include "otlab/matkernel.hpp"
#include "otlab/weightgen.hpp"

namespace otcli {

using nlohmann::json;

// Input file problems; the message carries the offending path inside the
// document so a user can find the field.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

json load_json_file(const std::string& path);

otlab::CMatrix matrix_from_json(const json& j, const std::string& where);
json matrix_to_json(const otlab::CMatrix& M);

otlab::WeightGen weightgen_from_json(const json& j, const std::string& where);

// {"vertices": [...], "edges": [[parent, child], ...], "root"?, "weights",
// "tails": [{"attach", "gen", "offset"?}], "up_ray"?}. Vertices may be
// addressed by index or by name everywhere.
otlab::TreeShift tree_shift_from_json(const json& j);

otlab::BasisIndex index_from_json(const json& j, const std::string& where);
json index_to_json(const otlab::BasisIndex& u);

// Array of {"tag", "a", "b"?, "space"?, "re", "im"?} entries.
otlab::FinVec finvec_from_json(const json& j, const std::string& where);
json finvec_to_json(const otlab::FinVec& x);

json complex_to_json(const otlab::Complex& z);

// Depth-first flattening into "path,value" rows for the tabular output mode.
std::string csv_flatten(const json& report);

}  // namespace otcli
