// Copyright 2026 The clbcs Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace clbcs {

/// SplitMix64 finalizer; a bijection on 64-bit words with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent child seed from a master seed, a stream name and an
/// index. All randomness in the tools flows through this so that streams
/// ("scheme-sampling", "batching", "outcomes", "haar") never overlap.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                    std::uint64_t index = 0) noexcept {
    return mix64(mix64(master ^ fnv1a(stream)) + mix64(index + 0x632be59bd9b4e019ULL));
}

/// Thin wrapper over mt19937_64 with the handful of draws the library needs.
/// Uniform draws are computed from raw engine output so sequences are
/// reproducible across standard library implementations.
class Rng {
  public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - n + 1) % n;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= limit) {
                return x % n;
            }
        }
    }

    double normal() { return normal_(engine_); }

    engine_type &engine() { return engine_; }

  private:
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace clbcs
