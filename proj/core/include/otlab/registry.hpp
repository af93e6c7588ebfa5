#pragma once

#include "otlab/lazyop.hpp"

#include <map>
#include <string>
#include <vector>

namespace otlab {

// Named operator bundle for one worked scenario.
struct OperatorSet {
  std::map<std::string, LazyOperator> ops;
  std::string description;
};

// Scenario ids: ch1_shift_multiplicity, ch2_coincidence_pair,
// ch2_stable_product_pair, ch3_banach_dependent, ch3_no_cesaro,
// ch3_not_power_bounded, ch5_counterexample. Unknown ids raise
// invalid_argument.
OperatorSet example_registry(const std::string& name);

std::vector<std::string> example_registry_names();

}  // namespace otlab
