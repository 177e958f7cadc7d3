//
// Copyright 2026 The dpsurvey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cstdint>
#include <random>

namespace dpsurvey {

// All randomness flows through per-trial generators derived from
// (seed, stream). Trial t of an experiment always sees the same stream no
// matter how trials are scheduled across threads.
using Rng = std::mt19937_64;

// SplitMix64 finalizer applied to the pair. Distinct (seed, stream) pairs map
// to well-separated 64-bit seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

// Uniform on [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Midpoint of one of 2^52 equal cells of (0, 1), chosen by the top 52 bits.
// With 53 bits the last midpoint would round up to exactly 1.
inline double open01_from_bits(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) { return open01_from_bits(rng()); }

}  // namespace dpsurvey
