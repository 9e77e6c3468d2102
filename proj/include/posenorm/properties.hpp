#pragma once

#include <string>
#include <vector>

namespace posenorm {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Test hooks for checking that the harness reports failures by name.
struct PropertyHooks {
  bool break_adjoint = false;
};

/// Geometry invariants: point round-trips, isometry, exact 90-degree warps,
/// smooth-map warp round-trips, and the warp adjoint identity.
std::vector<PropertyResult> geometry_properties(uint64_t seed, const PropertyHooks& hooks = {});

/// Finite-difference gradient checks over every layer kind and both losses,
/// run in double precision on small random nets.
std::vector<PropertyResult> gradient_properties(uint64_t seed);

bool all_pass(const std::vector<PropertyResult>& results);

}  // namespace posenorm
