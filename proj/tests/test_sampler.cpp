#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "pathoed/errors.hpp"
#include "pathoed/sampler.hpp"
#include "support.hpp"

using namespace pathoed;
using testing::example_mesh;
using testing::example_params;

TEST_CASE("sampling is deterministic under a fixed seed") {
    const auto mesh = example_mesh();
    const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);
    const auto a = sample_paths(dist, 64, RngSeed{42});
    const auto b = sample_paths(dist, 64, RngSeed{42});
    CHECK(a == b);
    const auto c = sample_paths(dist, 64, RngSeed{43});
    CHECK(a != c);
    // Per-ordinal streams: a shorter run is a prefix of a longer one.
    const auto prefix = sample_paths(dist, 16, RngSeed{42});
    CHECK(std::equal(prefix.begin(), prefix.end(), a.begin()));
}

TEST_CASE("sampled paths lie in the support of their own distribution") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        const auto mesh = testing::random_mesh(rng);
        const auto params = testing::random_params(*mesh, rng, 2, LagMode::FixedHarmonic);
        const auto reach = std::make_shared<ReachabilityIndex>(*mesh, 2);
        const auto dist =
            PathDistribution::generalized_higher_order(mesh, reach, params, 2, 4);
        for (const auto& path : sample_paths(dist, 200, RngSeed{trial + 1u})) {
            CHECK(dist.log_pmf(path) > -std::numeric_limits<double>::infinity());
        }
    }
}

TEST_CASE("first-order empirical frequencies match the worked example") {
    const auto mesh = example_mesh();
    const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);
    const Path target{3, 2, 0};  // v4 -> v3 -> v1, probability 12/60
    int hits = 0;
    const std::size_t count = 200000;
    for (const auto& path : sample_paths(dist, count, RngSeed{7})) {
        if (path == target) ++hits;
        CHECK(mesh->has_arc(path[0], path[1]));
        CHECK(mesh->has_arc(path[1], path[2]));
    }
    CHECK(std::abs(static_cast<double>(hits) / count - 0.2) < 0.005);
}

TEST_CASE("forced start pins the first node for all three kinds") {
    const auto mesh = example_mesh();
    const int start = 0;
    auto force = [&](PolicyParams params) {
        params.initial.setZero();
        params.initial[start] = 1.0;
        return params;
    };
    const auto reach = std::make_shared<ReachabilityIndex>(*mesh, 2);
    const PathDistribution dists[] = {
        PathDistribution::first_order(mesh, force(example_params(*mesh)), 3),
        PathDistribution::higher_order(
            mesh, force(example_params(*mesh, 2, LagMode::FixedHarmonic)), 2, 3),
        PathDistribution::generalized_higher_order(
            mesh, reach, force(example_params(*mesh, 2, LagMode::FixedHarmonic)), 2, 3),
    };
    for (const auto& dist : dists) {
        for (const auto& path : sample_paths(dist, 10000, RngSeed{13})) {
            REQUIRE(path[0] == start);
        }
    }
}

TEST_CASE("generalized sampling: support coverage and chi-squared fit") {
    const auto mesh = example_mesh();
    const auto reach = std::make_shared<ReachabilityIndex>(*mesh, 2);
    const auto dist = PathDistribution::generalized_higher_order(
        mesh, reach, example_params(*mesh, 2, LagMode::FixedHarmonic), 2, 3);

    std::map<Path, double> expected;
    for (const auto& [path, probability] : dist.enumerate_support()) {
        expected[path] = probability;
    }
    REQUIRE(expected.size() == 19);

    std::map<Path, int> observed;
    const std::size_t count = 500000;
    for (const auto& path : sample_paths(dist, count, RngSeed{99})) {
        REQUIRE(expected.count(path) == 1);  // empirical mass on the support only
        ++observed[path];
    }

    double chi2 = 0.0;
    for (const auto& [path, probability] : expected) {
        const double expect = probability * static_cast<double>(count);
        const double diff = observed[path] - expect;
        chi2 += diff * diff / expect;
    }
    // 0.999 quantile of chi-squared with 18 degrees of freedom.
    CHECK(chi2 < 42.313);
}

TEST_CASE("higher-order kinds jump across missing arcs") {
    const auto mesh = example_mesh();
    const auto dist = PathDistribution::higher_order(
        mesh, example_params(*mesh, 2, LagMode::FixedHarmonic), 2, 3);
    int jumps = 0;
    for (const auto& path : sample_paths(dist, 5000, RngSeed{3})) {
        if (!mesh->has_arc(path[1], path[2])) ++jumps;
    }
    CHECK(jumps > 0);
}

TEST_CASE("dead ends fail loudly") {
    const auto chain = std::make_shared<NavMesh>(2, std::vector<Arc>{{0, 1}});
    PolicyParams params = uniform_params(*chain);
    params.initial << 1.0, 0.0;
    try {
        sample_paths(PathDistribution::first_order(chain, params, 3), 10, RngSeed{1});
        FAIL("expected SamplingError");
    } catch (const SamplingError& e) {
        CHECK(e.vertex() == 1);
        CHECK(e.step() == 2);
    }
}
