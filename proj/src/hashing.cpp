#include "tnsketch/hashing.hpp"

#include "tnsketch/errors.hpp"

namespace tnsketch {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 t = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(t & kMersenne61);
  std::uint64_t hi = static_cast<std::uint64_t>(t >> 61);
  std::uint64_t s = lo + hi;
  if (s >= kMersenne61) s -= kMersenne61;
  return s;
}

std::uint64_t addmod61(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;  // both < 2^61, no overflow
  if (s >= kMersenne61) s -= kMersenne61;
  return s;
}

// Uniform draw from [0, 2^61 - 1). Only the all-ones 61-bit value is rejected,
// so this terminates almost immediately.
std::uint64_t draw_mod_p(std::uint64_t& state) {
  for (;;) {
    state = splitmix64(state);
    std::uint64_t v = state & kMersenne61;
    if (v != kMersenne61) return v;
  }
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = splitmix64(master ^ fnv1a(tag));
  return splitmix64(h ^ index);
}

KWiseHash::KWiseHash(int k, std::uint64_t seed, std::int64_t domain, std::int64_t range)
    : k_(k), n_(domain), m_(range) {
  if (k < 1) throw ValidationError("independence must be at least 1");
  if (domain < 1 || range < 1) throw ValidationError("hash domain and range must be positive");
  std::uint64_t state = seed;
  coeff_.resize(k);
  for (int j = 0; j < k; ++j) coeff_[j] = draw_mod_p(state);
}

KWiseHash KWiseHash::from_table(std::vector<std::int64_t> values, std::int64_t range) {
  for (auto v : values) {
    if (v < 1 || v > range) throw ValidationError("table value out of range");
  }
  KWiseHash h;
  h.k_ = 1;
  h.n_ = static_cast<std::int64_t>(values.size());
  h.m_ = range;
  h.table_ = std::move(values);
  return h;
}

std::uint64_t KWiseHash::raw(std::int64_t x) const {
  if (x < 1 || x > n_) throw ValidationError("hash input out of domain");
  // Horner over the prime field; low bias from the final mod since m << p.
  std::uint64_t xv = static_cast<std::uint64_t>(x) % kMersenne61;
  std::uint64_t acc = 0;
  for (std::size_t j = coeff_.size(); j-- > 0;) {
    acc = addmod61(mulmod61(acc, xv), coeff_[j]);
  }
  return acc;
}

std::int64_t KWiseHash::operator()(std::int64_t x) const {
  if (!table_.empty()) {
    if (x < 1 || x > n_) throw ValidationError("hash input out of domain");
    return table_[x - 1];
  }
  return static_cast<std::int64_t>(raw(x) % static_cast<std::uint64_t>(m_)) + 1;
}

SignHash::SignHash(std::uint64_t seed, std::int64_t domain)
    : inner_(4, seed, domain, 2) {}

SignHash SignHash::from_table(std::vector<int> signs) {
  std::vector<std::int64_t> table;
  table.reserve(signs.size());
  for (int s : signs) {
    if (s != 1 && s != -1) throw ValidationError("sign table entries must be +-1");
    table.push_back(s == 1 ? 1 : 2);
  }
  return SignHash(KWiseHash::from_table(std::move(table), 2));
}

int SignHash::operator()(std::int64_t x) const {
  return inner_(x) == 1 ? 1 : -1;
}

}  // namespace tnsketch
