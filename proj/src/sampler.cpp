#include "pathoed/sampler.hpp"

#include <string>

#include "pathoed/errors.hpp"

namespace pathoed {

namespace {

// Inverse-CDF draw over (value, mass) pairs; masses need not be normalized.
template <typename Successors>
int categorical_draw(const Successors& successors, double u) {
    double total = 0.0;
    for (const auto& s : successors) total += s.probability;
    double target = u * total;
    int last = -1;
    for (const auto& s : successors) {
        last = s.vertex;
        target -= s.probability;
        if (target < 0.0) return s.vertex;
    }
    return last;
}

}  // namespace

Path sample_path(const PathDistribution& dist, RngSeed seed, std::uint64_t ordinal) {
    RandomStream rng(seed, ordinal);
    const auto& initial = dist.initial_probabilities();

    Path path;
    path.reserve(dist.path_length());

    {
        double target = rng.uniform();
        int chosen = -1;
        for (Eigen::Index v = 0; v < initial.size(); ++v) {
            if (initial[v] <= 0.0) continue;
            chosen = static_cast<int>(v);
            target -= initial[v];
            if (target < 0.0) break;
        }
        path.push_back(chosen);
    }

    while (static_cast<int>(path.size()) < dist.path_length()) {
        const auto successors = dist.successor_distribution(path);
        if (successors.empty()) {
            throw SamplingError("no admissible successor from vertex " +
                                    std::to_string(path.back() + 1) + " at step " +
                                    std::to_string(path.size()),
                                path.back(), static_cast<int>(path.size()));
        }
        path.push_back(categorical_draw(successors, rng.uniform()));
    }
    return path;
}

std::vector<Path> sample_paths(const PathDistribution& dist, std::size_t count, RngSeed seed) {
    std::vector<Path> sample;
    sample.reserve(count);
    for (std::size_t ordinal = 0; ordinal < count; ++ordinal) {
        sample.push_back(sample_path(dist, seed, ordinal));
    }
    return sample;
}

}  // namespace pathoed
