#include "mscan/rng.hpp"

namespace mscan {

namespace {

// splitmix64 finaliser
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (auto p : parts) h = mix(h ^ mix(p));
  return h;
}

Engine make_engine(std::initializer_list<std::uint64_t> parts) {
  return Engine(derive_seed(parts));
}

}  // namespace mscan
