#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace krondim::batteries {

struct BatteryResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_notes;  // first few failing cases

  bool passed() const { return failures == 0 && cases > 0; }
};

/// Statistics restricted to a random Lambda-ball have full rank dim_V, on
/// random spaces (n <= 5, alphabets of size 1..3), random inclusion-closed
/// families and random centers.
BatteryResult full_rank_balls(std::size_t cases, std::uint64_t seed);

/// Ball slicings for random k-interaction models and random center sets at
/// pairwise distance >= 2k+1 contain their balls; the signed inner-product
/// identity is checked on the same instances.
BatteryResult ball_containment(std::size_t cases, std::uint64_t seed);

/// Truncated slicings of random generic slicing pairs equal the set algebra
/// D2 & C_1, ..., D2 & C_N, D1.
BatteryResult truncated_slicings(std::size_t cases, std::uint64_t seed);

/// generic_dim and the tropical oracle are unchanged when A or B is replaced
/// by Q A or Q B for a random nonsingular integer Q.
BatteryResult linear_invariance(std::size_t cases, std::uint64_t seed);

}  // namespace krondim::batteries
