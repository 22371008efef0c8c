#pragma once

#include <cstdint>

#include "fremond/config.hpp"

namespace fremond {

/**
 * Low-frequency cosine series sum_{k} a_k cos(k pi x / L) (tensor modes in 2D),
 * k = 0..modes-1 excluding the constant mode, coefficients drawn from a seeded
 * splitmix64 stream and scaled by 1/(1+k^2). Normalized so max |value| <= 1.
 */
Field random_smooth_field(const Grid& grid, std::uint64_t seed, int modes);

/// exp(-(|x - c|/w)^2) with c = center * extent on each axis.
Field gaussian_bump(const Grid& grid, double center, double width);

/// Initial state for the configured preset; validates theta > 0.
State build_initial_state(const RunConfig& cfg);

} // namespace fremond
