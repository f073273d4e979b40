/*
 Copyright 2026 The bslq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Counter-based Brownian increments.
//
// Generator: Philox4x32-10 (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC'11), the same variant as Random123 and
// std::philox4x32. The 128-bit counter is (step_lo, step_hi, path_lo,
// path_hi) and the 64-bit key is (seed_lo, seed_hi). The first two output
// words give a 53-bit uniform u1 in (0, 1), the last two a 53-bit uniform
// u2 in [0, 1); the standard normal is sqrt(-2 ln u1) cos(2 pi u2).
//
// Increments always come from the finest level of a refinement hierarchy:
// a coarse increment is the sum of its fine increments, so ensembles at
// different step counts are coupled path by path.
//
// Stream version 1. Any change to the mapping above must bump
// kBrownianStreamVersion.

#pragma once

#include "bslq/core.hpp"
#include "bslq/paths.hpp"

#include <array>
#include <cstdint>
#include <numbers>

namespace bslq
{

inline constexpr int kBrownianStreamVersion = 1;

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds.
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept
{
    constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Standard normal variate for (seed, path, fine step).
inline double brownian_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) noexcept
{
    const PhiloxCounter ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                            static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const PhiloxCounter r = philox4x32_10(ctr, key);
    constexpr double kScale = 1.0 / 9007199254740992.0; // 2^-53
    const std::uint64_t m1 = (static_cast<std::uint64_t>(r[0] >> 5) << 26) | (r[1] >> 6);
    const std::uint64_t m2 = (static_cast<std::uint64_t>(r[2] >> 5) << 26) | (r[3] >> 6);
    const double u1 = (static_cast<double>(m1) + 0.5) * kScale;
    const double u2 = static_cast<double>(m2) * kScale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// P Brownian paths on a TimeGrid. Every grid increment is the sum of
/// `refinement` consecutive increments of the finest grid.
class BrownianEnsemble
{
public:
    BrownianEnsemble(std::uint64_t seed, long paths, TimeGrid grid, int refinement = 1)
        : seed_(seed), paths_(paths), grid_(grid), refinement_(refinement)
    {
        if (paths <= 0)
            throw Error("BrownianEnsemble: path count must be positive");
        if (refinement <= 0)
            throw Error("BrownianEnsemble: refinement must be positive");
    }

    std::uint64_t seed() const noexcept { return seed_; }
    long paths() const noexcept { return paths_; }
    const TimeGrid &grid() const noexcept { return grid_; }
    int refinement() const noexcept { return refinement_; }
    int fine_steps() const noexcept { return grid_.steps * refinement_; }

    /// Same paths observed on a grid `factor` times coarser.
    BrownianEnsemble coarsened(int factor) const
    {
        if (factor <= 0 || grid_.steps % factor != 0)
            throw Error("BrownianEnsemble::coarsened: factor must divide the step count");
        return BrownianEnsemble(seed_, paths_, TimeGrid(grid_.T, grid_.steps / factor), refinement_ * factor);
    }

    /// Writes the grid increments of path p into `out` (size = steps).
    void increments(long p, std::span<double> out) const
    {
        if (out.size() != static_cast<std::size_t>(grid_.steps))
            throw Error("BrownianEnsemble::increments: output size mismatch");
        const double scale = std::sqrt(grid_.T / fine_steps());
        std::uint64_t j = 0;
        for (std::size_t k = 0; k < out.size(); ++k)
        {
            double s = 0.0;
            for (int r = 0; r < refinement_; ++r, ++j)
                s += scale * brownian_normal(seed_, static_cast<std::uint64_t>(p), j);
            out[k] = s;
        }
    }

    std::vector<double> increments(long p) const
    {
        std::vector<double> out(static_cast<std::size_t>(grid_.steps));
        increments(p, out);
        return out;
    }

    /// W at every node of path p, W(0) = 0.
    std::vector<double> path(long p) const
    {
        const auto dw = increments(p);
        std::vector<double> w(dw.size() + 1, 0.0);
        for (std::size_t k = 0; k < dw.size(); ++k)
            w[k + 1] = w[k] + dw[k];
        return w;
    }

private:
    std::uint64_t seed_;
    long paths_;
    TimeGrid grid_;
    int refinement_;
};

} // namespace bslq
