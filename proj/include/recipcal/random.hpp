// SPDX-License-Identifier: Apache-2.0
//
// recipcal - TDD reciprocity calibration for hybrid beamforming transceivers
// Copyright (C) 2026 The recipcal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef recipcal_random_H
#define recipcal_random_H

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace recipcal
{
    // SplitMix64 finalizer, used to derive independent stream seeds from (base, key...) tuples
    constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Seed of a sub-stream identified by a key path, e.g. derive_seed(seed, {tag, trial, l, k}).
    // Streams keyed by index make results independent of evaluation order.
    inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept
    {
        std::uint64_t s = mix_seed(base);
        for (auto k : keys)
            s = mix_seed(s ^ mix_seed(k + 0x632BE59BD9B4E019ULL));
        return s;
    }

    // Seeded random source shared by all sampling operations
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        // Uniform on [lo, hi)
        double uniform(double lo = 0.0, double hi = 1.0)
        {
            return std::uniform_real_distribution<double>(lo, hi)(engine_);
        }

        // Uniform phase on [-pi, pi)
        double phase()
        {
            return uniform(-std::numbers::pi, std::numbers::pi);
        }

        // Circularly-symmetric complex Gaussian with E|z|^2 = variance
        std::complex<double> complex_normal(double variance = 1.0)
        {
            const double sd = std::sqrt(0.5 * variance);
            std::normal_distribution<double> n(0.0, sd);
            const double re = n(engine_);
            const double im = n(engine_);
            return {re, im};
        }

        std::uint64_t next_u64() { return engine_(); }

        unsigned index(unsigned n)
        {
            return std::uniform_int_distribution<unsigned>(0, n - 1)(engine_);
        }

        std::mt19937_64 &engine() noexcept { return engine_; }

    private:
        std::mt19937_64 engine_;
    };
}

#endif
