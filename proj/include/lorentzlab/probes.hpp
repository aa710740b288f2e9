#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace lorentzlab::harness {

// Exploratory side-by-side studies.  Each probe runs a small canned ensemble
// pair (or sweep), prints estimate tables with normal-approximation 95%
// intervals, and never fails: the output is for reading, not gating.
std::vector<std::string> probe_names();

// Runs the named probe; throws ConfigError for unknown names.
void run_probe(const std::string& name, std::uint64_t seed, std::ostream& out);

}  // namespace lorentzlab::harness
