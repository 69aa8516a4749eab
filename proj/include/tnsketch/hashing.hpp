#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tnsketch {

std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a (purpose, index) slot under a master seed. Every random
/// object in a run is derived this way so a single seed reproduces everything.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

/// k-wise independent hash [1,n] -> [1,m]: a seed-derived degree-(k-1)
/// polynomial over the Mersenne prime 2^61 - 1, bucketed by mod m. Immutable
/// and reentrant.
class KWiseHash {
 public:
  KWiseHash(int k, std::uint64_t seed, std::int64_t domain, std::int64_t range);

  /// Test fixture: explicit value table instead of a polynomial.
  static KWiseHash from_table(std::vector<std::int64_t> values, std::int64_t range);

  std::int64_t operator()(std::int64_t x) const;  // in [1, range]
  std::uint64_t raw(std::int64_t x) const;        // polynomial value in [0, p)

  int independence() const { return k_; }
  std::int64_t domain() const { return n_; }
  std::int64_t range() const { return m_; }

  bool operator==(const KWiseHash&) const = default;

 private:
  KWiseHash() = default;
  int k_ = 0;
  std::int64_t n_ = 1;
  std::int64_t m_ = 1;
  std::vector<std::uint64_t> coeff_;     // low-degree first
  std::vector<std::int64_t> table_;      // non-empty for fixtures
};

/// 4-wise independent sign function [1,n] -> {-1,+1}.
class SignHash {
 public:
  SignHash(std::uint64_t seed, std::int64_t domain);
  static SignHash from_table(std::vector<int> signs);

  int operator()(std::int64_t x) const;
  std::int64_t domain() const { return inner_.domain(); }

  bool operator==(const SignHash&) const = default;

 private:
  explicit SignHash(KWiseHash inner) : inner_(std::move(inner)) {}
  KWiseHash inner_;
};

}  // namespace tnsketch
