#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msmpolicy {

/// Balanced random partition of n units into k folds.
struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;
  std::uint64_t seed = 0;

  std::size_t n() const noexcept { return fold_of.size(); }
  std::vector<std::size_t> members(int fold) const;
  std::vector<std::size_t> complement(int fold) const;
  std::vector<std::size_t> sizes() const;
};

/// Shuffles 0..n-1 with Fisher-Yates driven by Rng(seed) and deals the
/// permutation round-robin, so fold sizes are floor(n/k) or ceil(n/k).
/// Throws BadK unless 2 <= k <= n.
FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed);

}  // namespace msmpolicy
