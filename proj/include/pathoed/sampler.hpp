#ifndef PATHOED_SAMPLER_HPP
#define PATHOED_SAMPLER_HPP

#include <cstddef>
#include <vector>

#include "pathoed/policy.hpp"
#include "pathoed/rng.hpp"

namespace pathoed {

// Draw `count` i.i.d. trajectories. Each sample uses its own RNG stream
// derived from (seed, ordinal), so identical seeds reproduce identical
// samples regardless of execution order. Throws SamplingError when a
// trajectory reaches a vertex with no admissible successor.
std::vector<Path> sample_paths(const PathDistribution& dist, std::size_t count, RngSeed seed);

// One trajectory from the stream (seed, ordinal).
Path sample_path(const PathDistribution& dist, RngSeed seed, std::uint64_t ordinal);

}  // namespace pathoed

#endif
