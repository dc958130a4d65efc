#pragma once

#include <string>
#include <vector>

namespace rtaes::selftest {

struct GroupResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Known-answer and property checks grouped by subsystem. `quick` trims the
// randomized trial counts.
std::vector<GroupResult> run_all(bool quick = false);

}  // namespace rtaes::selftest
