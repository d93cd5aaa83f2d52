/*
 * Copyright 2026 The ertalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ERTALIGN_RANDOM_H_
#define ERTALIGN_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ertalign {

using Rng = std::mt19937_64;

// splitmix64 finaliser; derives independent child seeds from a parent seed
// and a list of indices so that work can be split without sharing a stream.
inline uint64_t mix_seed(uint64_t seed, std::initializer_list<uint64_t> keys) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  uint64_t h = mix(seed);
  for (uint64_t k : keys) h = mix(h ^ mix(k));
  return h;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double sigma) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

}  // namespace ertalign

#endif  // ERTALIGN_RANDOM_H_
