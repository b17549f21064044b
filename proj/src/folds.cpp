#include "msmpolicy/folds.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "msmpolicy/error.hpp"
#include "msmpolicy/random.hpp"

namespace msmpolicy {

std::vector<std::size_t> FoldAssignment::members(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
  for (int f : fold_of) ++out[static_cast<std::size_t>(f)];
  return out;
}

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kBadK,
                "fold count " + std::to_string(k) + " invalid for n=" + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.fold_of.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    out.fold_of[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return out;
}

}  // namespace msmpolicy
