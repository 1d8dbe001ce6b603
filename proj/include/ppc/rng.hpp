// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers for order-independent simulation.
//
// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
// 3", SC'11). A stream is addressed by (seed, stream, substream); the
// simulator uses stream = pixel index and substream = bin index, so every
// bin of every pixel draws from its own sequence regardless of how pixels
// are scheduled across workers.

#ifndef PPC_RNG_HPP_
#define PPC_RNG_HPP_

#include <array>
#include <cstdint>

namespace ppc {

using PhiloxKey = std::array<std::uint32_t, 2>;
using PhiloxCounter = std::array<std::uint32_t, 4>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

class PhiloxStream {
  public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream);

    std::uint64_t next_u64();
    // Uniform double in [0, 1) with 53 random bits.
    double next_double();
    // Uniform double in (0, 1).
    double next_open_double();

  private:
    void refill();

    PhiloxKey key_;
    PhiloxCounter counter_;
    PhiloxCounter block_{};
    int used_ = 4;
};

// Poisson(mean) draw. Inversion for small means, Hormann's PTRS
// transformed rejection for mean >= 10. Consumes draws only from `rng`.
std::uint32_t sample_poisson(double mean, PhiloxStream& rng);

}  // namespace ppc

#endif  // PPC_RNG_HPP_
