#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tandem {

// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
// <random> engines so that streams are identical across platforms and
// standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1}; n must be > 0.
  uint64_t next_below(uint64_t n) {
    // Rejection-free multiply-shift; bias is negligible for the n used here
    // and the mapping is fully deterministic.
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform in (-bound, bound).
  double next_symmetric(double bound) {
    return (next_double() * 2.0 - 1.0) * bound;
  }

 private:
  uint64_t state_;
};

// Derives a purpose-tagged sub-seed from a master seed. Distinct tags give
// independent streams, so toggling one pipeline stage never perturbs the
// random draws of another.
uint64_t derive_seed(uint64_t master, std::string_view tag);
uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index);

// Fisher-Yates shuffle driven by the generator above.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace tandem
