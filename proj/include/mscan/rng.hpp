#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mscan {

using Engine = std::mt19937_64;

// Mixes a root seed with stream identifiers (replication index, design id,
// sample size, ...) into an independent-looking 64-bit seed. Every random
// stream in the library is derived this way so results do not depend on
// thread count or scheduling.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

Engine make_engine(std::initializer_list<std::uint64_t> parts);

}  // namespace mscan
