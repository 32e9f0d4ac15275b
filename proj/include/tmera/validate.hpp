#pragma once

#include <string>
#include <vector>

namespace tmera::validate {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0;      // measured deviation
  double tolerance = 0;
  std::string detail;
};

// "small": T <= 3 oracle equivalence plus invariants on a few seeds;
// "full": more seeds and forms.
std::vector<Check> run_suite(const std::string& suite);

}  // namespace tmera::validate
