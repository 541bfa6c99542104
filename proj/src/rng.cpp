#include "tandem/rng.hpp"

namespace tandem {

namespace {

uint64_t mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view tag) {
  return mix(master ^ mix(fnv1a(tag)));
}

uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index) {
  return mix(derive_seed(master, tag) ^ mix(index + 0x9e3779b97f4a7c15ULL));
}

}  // namespace tandem
