#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pathoed/errors.hpp"
#include "pathoed/policy.hpp"
#include "support.hpp"

using namespace pathoed;
using testing::example_mesh;
using testing::example_params;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Central finite difference of log_pmf along one flat coordinate.
double fd_flat(const PathDistribution& dist, const Path& path, int coord, double h = 1e-6) {
    Eigen::VectorXd flat = dist.flatten_params();
    flat[coord] += h;
    const double up = dist.with_params(dist.unflatten_params(flat)).log_pmf(path);
    flat[coord] -= 2 * h;
    const double down = dist.with_params(dist.unflatten_params(flat)).log_pmf(path);
    return (up - down) / (2 * h);
}

// Finite difference along a simplex-tangent direction for lag weights.
double fd_lag_tangent(const PathDistribution& dist, const Path& path, int lag,
                      double h = 1e-6) {
    const int k = dist.order();
    PolicyParams params = dist.params();
    Eigen::VectorXd direction = Eigen::VectorXd::Constant(k, -1.0 / k);
    direction[lag] += 1.0;
    PolicyParams up = params, down = params;
    up.lag_weights += h * direction;
    down.lag_weights -= h * direction;
    return (dist.with_params(up).log_pmf(path) - dist.with_params(down).log_pmf(path)) /
           (2 * h);
}

double rel_err(double expected, double actual) {
    return std::abs(expected - actual) /
           std::max({1.0, std::abs(expected), std::abs(actual)});
}

// Max relative error of grad_log_pmf against central differences (lag
// coordinates compared along simplex-tangent directions).
double max_grad_fd_error(const PathDistribution& dist, const Path& path) {
    const LogPmfGradient grad = dist.grad_log_pmf(path);
    const Eigen::VectorXd flat = dist.flatten_gradient(grad);
    const int base = static_cast<int>(grad.d_initial.size() + grad.d_transition.size());
    double worst = 0.0;
    for (int c = 0; c < base; ++c) {
        worst = std::max(worst, rel_err(fd_flat(dist, path, c), flat[c]));
    }
    if (dist.params().lag_weights.size() > 0 &&
        dist.params().lag_mode == LagMode::Optimized) {
        const int k = dist.order();
        for (int l = 0; l < k; ++l) {
            const double expected = grad.d_lag[l] - grad.d_lag.mean();
            worst = std::max(worst, rel_err(fd_lag_tangent(dist, path, l), expected));
        }
    }
    return worst;
}

PathDistribution make_kind(PolicyKind kind, std::shared_ptr<const NavMesh> mesh,
                           PolicyParams params, int order, int n) {
    switch (kind) {
        case PolicyKind::FirstOrder:
            return PathDistribution::first_order(mesh, std::move(params), n);
        case PolicyKind::HigherOrder:
            return PathDistribution::higher_order(mesh, std::move(params), order, n);
        case PolicyKind::GeneralizedHigherOrder:
            return PathDistribution::generalized_higher_order(
                mesh, std::make_shared<ReachabilityIndex>(*mesh, order), std::move(params),
                order, n);
    }
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("inclusion probabilities") {
    const auto mesh = example_mesh();
    SUBCASE("uniform 1/2 parameters give the uniform distribution") {
        const Eigen::VectorXd pi = initial_probabilities(*mesh, example_params(*mesh));
        for (int i = 0; i < 5; ++i) CHECK(pi[i] == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("forced start") {
        const auto m3 = std::make_shared<NavMesh>(3, std::vector<Arc>{{0, 1}, {1, 2}, {2, 0}});
        PolicyParams params = uniform_params(*m3);
        params.initial << 1.0, 0.0, 0.0;
        const Eigen::VectorXd pi = initial_probabilities(*m3, params);
        CHECK(pi[0] == 1.0);
        CHECK(pi[1] == 0.0);
        CHECK(pi[2] == 0.0);
    }
    SUBCASE("two-node odds ratio") {
        const auto m2 = std::make_shared<NavMesh>(2, std::vector<Arc>{{0, 1}, {1, 0}});
        PolicyParams params = uniform_params(*m2);
        params.initial << 0.8, 0.2;
        const Eigen::VectorXd pi = initial_probabilities(*m2, params);
        CHECK(pi[0] == doctest::Approx(16.0 / 17).epsilon(1e-14));
        CHECK(pi[1] == doctest::Approx(1.0 / 17).epsilon(1e-14));
    }
    SUBCASE("degenerate groups are rejected") {
        PolicyParams params = example_params(*mesh);
        params.initial.setZero();
        CHECK_THROWS_AS(initial_probabilities(*mesh, params), InvalidParamsError);
        params.initial << 1.0, 1.0, 0.0, 0.0, 0.0;
        CHECK_THROWS_AS(initial_probabilities(*mesh, params), InvalidParamsError);
        params.initial << 1.0, 0.5, 0.0, 0.0, 0.0;
        CHECK_THROWS_AS(initial_probabilities(*mesh, params), InvalidParamsError);
    }
}

TEST_CASE("transition probabilities") {
    const auto mesh = example_mesh();
    const PolicyParams params = example_params(*mesh);
    SUBCASE("example row of vertex 1") {
        const auto probs = transition_probabilities(*mesh, params, 0);
        REQUIRE(probs.size() == 3);
        CHECK(probs[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
        CHECK(probs[1] == doctest::Approx(1.0 / 6).epsilon(1e-12));
        CHECK(probs[2] == doctest::Approx(4.0 / 6).epsilon(1e-12));
    }
    SUBCASE("single outgoing arc is certain") {
        const auto probs = transition_probabilities(*mesh, params, 2);
        REQUIRE(probs.size() == 1);
        CHECK(probs[0] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("uniform parameters over d arcs give 1/d") {
        const NavMesh grid = build_grid_mesh(3, 3);
        const PolicyParams uniform = uniform_params(grid);
        const auto probs = transition_probabilities(grid, uniform, 4);
        REQUIRE(probs.size() == 4);
        for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("isolated vertex errors") {
        const NavMesh two = load_mesh("2\n1 2\n");
        CHECK_THROWS_AS(transition_probabilities(two, uniform_params(two), 1),
                        SamplingError);
    }
}

TEST_CASE("fixed harmonic lag weights") {
    CHECK(lag_weights_fixed_harmonic(1)[0] == doctest::Approx(1.0));
    const Eigen::VectorXd k2 = lag_weights_fixed_harmonic(2);
    CHECK(k2[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
    CHECK(k2[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    const Eigen::VectorXd k3 = lag_weights_fixed_harmonic(3);
    CHECK(k3[0] == doctest::Approx(6.0 / 11).epsilon(1e-14));
    CHECK(k3[1] == doctest::Approx(3.0 / 11).epsilon(1e-14));
    CHECK(k3[2] == doctest::Approx(2.0 / 11).epsilon(1e-14));
}

TEST_CASE("first-order log-PMF matches the worked example") {
    const auto mesh = example_mesh();
    const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);

    for (const auto& [path, probability] : testing::example_first_order_pmf()) {
        CHECK(std::exp(dist.log_pmf(path)) == doctest::Approx(probability).epsilon(1e-12));
    }
    CHECK(dist.log_pmf({2, 1, 3}) == -kInf);
    CHECK_THROWS_AS(dist.log_pmf({0, 1}), ContractError);
}

TEST_CASE("higher-order log-PMF fixtures") {
    const auto mesh = example_mesh();
    const PolicyParams params = example_params(*mesh, 2, LagMode::FixedHarmonic);

    SUBCASE("Raftery mixture: P(v1,v2,v2) = 1/540") {
        const auto dist = PathDistribution::higher_order(mesh, params, 2, 3);
        CHECK(std::exp(dist.log_pmf({0, 1, 1})) ==
              doctest::Approx(1.0 / 540).epsilon(1e-12));
    }
    SUBCASE("lag-dependent transitions: P(v1,v2,v1) = 1/540 and (v1,v2,v2) leaves the support") {
        const auto reach = std::make_shared<ReachabilityIndex>(*mesh, 2);
        const auto dist =
            PathDistribution::generalized_higher_order(mesh, reach, params, 2, 3);
        CHECK(std::exp(dist.log_pmf({0, 1, 0})) ==
              doctest::Approx(1.0 / 540).epsilon(1e-12));
        CHECK(dist.log_pmf({0, 1, 1}) == -kInf);
    }
}

TEST_CASE("two-step transition matrix") {
    const auto mesh = example_mesh();
    const auto reach = std::make_shared<ReachabilityIndex>(*mesh, 2);
    const auto dist = PathDistribution::generalized_higher_order(
        mesh, reach, example_params(*mesh, 2, LagMode::FixedHarmonic), 2, 3);

    const Eigen::MatrixXd expected = testing::example_two_step_matrix();
    Eigen::MatrixXd assembled = Eigen::MatrixXd::Zero(5, 5);
    Eigen::MatrixXd one_step = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            assembled(i, j) = dist.multi_step_probability(2, i, j);
            one_step(i, j) = dist.transition_probability(i, j);
        }
    }
    CHECK((assembled - expected).cwiseAbs().maxCoeff() < 1e-12);
    // Independent route: the same matrix as a power of the one-step matrix.
    CHECK((assembled - one_step * one_step).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("support enumeration on the worked example") {
    const auto mesh = example_mesh();

    SUBCASE("first-order: 12 paths, published probabilities") {
        const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);
        const auto support = dist.enumerate_support();
        REQUIRE(support.size() == 12);
        const auto expected = testing::example_first_order_pmf();
        double total = 0.0;
        for (const auto& [path, probability] : support) {
            REQUIRE(expected.count(path) == 1);
            CHECK(probability == doctest::Approx(expected.at(path)).epsilon(1e-12));
            total += probability;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("higher-order k=2: 24 paths") {
        const auto dist = PathDistribution::higher_order(
            mesh, example_params(*mesh, 2, LagMode::FixedHarmonic), 2, 3);
        CHECK(dist.enumerate_support().size() == 24);
    }
    SUBCASE("generalized k=2: 19 paths") {
        const auto reach = std::make_shared<ReachabilityIndex>(*mesh, 2);
        const auto dist = PathDistribution::generalized_higher_order(
            mesh, reach, example_params(*mesh, 2, LagMode::FixedHarmonic), 2, 3);
        CHECK(dist.enumerate_support().size() == 19);
    }
    SUBCASE("support cap") {
        const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);
        CHECK_THROWS_AS(dist.enumerate_support(5), SupportTooLargeError);
    }
}

TEST_CASE("support probabilities normalize for all kinds") {
    std::mt19937_64 rng(2024);
    const PolicyKind kinds[] = {PolicyKind::FirstOrder, PolicyKind::HigherOrder,
                                PolicyKind::GeneralizedHigherOrder};
    for (int trial = 0; trial < 12; ++trial) {
        const auto mesh = testing::random_mesh(rng);
        std::uniform_int_distribution<int> order_dist(2, 3);
        std::uniform_int_distribution<int> extra_dist(1, 2);
        for (PolicyKind kind : kinds) {
            const int order = kind == PolicyKind::FirstOrder ? 1 : order_dist(rng);
            const int n = std::min(5, order + extra_dist(rng));
            const auto params = testing::random_params(
                *mesh, rng, kind == PolicyKind::FirstOrder ? 0 : order);
            const auto dist = make_kind(kind, mesh, params, order, n);
            double total = 0.0;
            for (const auto& [path, probability] : dist.enumerate_support()) {
                total += probability;
                CHECK(std::exp(dist.log_pmf(path)) ==
                      doctest::Approx(probability).epsilon(1e-10));
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("gradient fixtures") {
    const auto mesh = example_mesh();
    SUBCASE("initial-parameter gradient at uniform 1/2") {
        const auto dist = PathDistribution::first_order(mesh, uniform_params(*mesh), 3);
        const LogPmfGradient grad = dist.grad_log_pmf({0, 1, 2});
        CHECK(grad.d_initial[0] == doctest::Approx(3.2).epsilon(1e-12));
        CHECK(grad.d_initial[1] == doctest::Approx(-0.8).epsilon(1e-12));
    }
    SUBCASE("arcs not incident to the path have zero gradient under first order") {
        const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);
        const LogPmfGradient grad = dist.grad_log_pmf({4, 1, 2});  // v5 -> v2 -> v3
        // No factor conditions on vertex 3 or 4, so their rows stay zero.
        CHECK(grad.d_transition[mesh->arc_index(2, 0)] == 0.0);
        CHECK(grad.d_transition[mesh->arc_index(3, 2)] == 0.0);
    }
    SUBCASE("lag gradient of the Raftery model") {
        PolicyParams params = example_params(*mesh, 2, LagMode::Optimized);
        params.lag_weights << 2.0 / 3, 1.0 / 3;
        const auto dist = PathDistribution::higher_order(mesh, params, 2, 3);
        const LogPmfGradient grad = dist.grad_log_pmf({0, 1, 1});
        CHECK(grad.d_lag[1] == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("lag gradient vanishes under fixed-harmonic weights") {
        const auto dist = PathDistribution::higher_order(
            mesh, example_params(*mesh, 2, LagMode::FixedHarmonic), 2, 3);
        const LogPmfGradient grad = dist.grad_log_pmf({0, 1, 1});
        CHECK(grad.d_lag.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("outside the support the gradient is undefined") {
        const auto dist = PathDistribution::first_order(mesh, example_params(*mesh), 3);
        CHECK_THROWS_AS(dist.grad_log_pmf({2, 1, 3}), UndefinedGradientError);
    }
}

TEST_CASE("gradients match finite differences") {
    std::mt19937_64 rng(99);
    const PolicyKind kinds[] = {PolicyKind::FirstOrder, PolicyKind::HigherOrder,
                                PolicyKind::GeneralizedHigherOrder};
    for (PolicyKind kind : kinds) {
        for (int order : {2, 3}) {
            if (kind == PolicyKind::FirstOrder && order != 2) continue;
            for (int trial = 0; trial < 6; ++trial) {
                const auto mesh = testing::random_mesh(rng, 8);
                const int k = kind == PolicyKind::FirstOrder ? 1 : order;
                const int n = k + 2;
                const auto params =
                    testing::random_params(*mesh, rng, kind == PolicyKind::FirstOrder ? 0 : k);
                const auto dist = make_kind(kind, mesh, params, k, n);
                const auto support = dist.enumerate_support();
                REQUIRE(!support.empty());
                std::uniform_int_distribution<std::size_t> pick(0, support.size() - 1);
                const Path& path = support[pick(rng)].first;
                CHECK(max_grad_fd_error(dist, path) < 1e-5);
            }
        }
    }
}

TEST_CASE("higher-order kinds with k=1 reduce to first order") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const auto mesh = testing::random_mesh(rng);
        auto params = testing::random_params(*mesh, rng);
        const auto first = PathDistribution::first_order(mesh, params, 4);

        PolicyParams with_lag = params;
        with_lag.lag_weights = Eigen::VectorXd::Ones(1);
        const auto higher = PathDistribution::higher_order(mesh, with_lag, 1, 4);
        const auto generalized = PathDistribution::generalized_higher_order(
            mesh, std::make_shared<ReachabilityIndex>(*mesh, 1), with_lag, 1, 4);

        for (const auto& [path, probability] : first.enumerate_support()) {
            CHECK(higher.log_pmf(path) == doctest::Approx(first.log_pmf(path)).epsilon(1e-12));
            CHECK(generalized.log_pmf(path) ==
                  doctest::Approx(first.log_pmf(path)).epsilon(1e-12));
        }
    }
}

TEST_CASE("score identity: probability-weighted scores sum to zero") {
    std::mt19937_64 rng(31);
    const PolicyKind kinds[] = {PolicyKind::FirstOrder, PolicyKind::HigherOrder,
                                PolicyKind::GeneralizedHigherOrder};
    for (PolicyKind kind : kinds) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto mesh = testing::random_mesh(rng, 8);
            const int k = kind == PolicyKind::FirstOrder ? 1 : 2;
            const auto params = testing::random_params(
                *mesh, rng, kind == PolicyKind::FirstOrder ? 0 : k, LagMode::FixedHarmonic);
            const auto dist = make_kind(kind, mesh, params, k, k + 2);
            Eigen::VectorXd total = Eigen::VectorXd::Zero(dist.num_flat_params());
            for (const auto& [path, probability] : dist.enumerate_support()) {
                total += probability * dist.flatten_gradient(dist.grad_log_pmf(path));
            }
            CHECK(total.cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("score identity for optimized lag weights holds on the simplex tangent") {
    // Raw lag partials sum to n - k over the support (the PMF normalizes only
    // on the lag simplex); centering them recovers the zero-mean identity.
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 5; ++trial) {
        const auto mesh = testing::random_mesh(rng, 8);
        const auto params = testing::random_params(*mesh, rng, 2, LagMode::Optimized);
        const auto dist = make_kind(PolicyKind::HigherOrder, mesh, params, 2, 4);
        Eigen::VectorXd total = Eigen::VectorXd::Zero(dist.num_flat_params());
        for (const auto& [path, probability] : dist.enumerate_support()) {
            total += probability * dist.flatten_gradient(dist.grad_log_pmf(path));
        }
        const auto lag = total.tail(2);
        CHECK(total.head(total.size() - 2).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(lag[0] - lag.mean()) < 1e-8);
        CHECK(std::abs(lag[1] - lag.mean()) < 1e-8);
        // Each raw lag coordinate carries the off-simplex normalization drift.
        CHECK(lag[0] == doctest::Approx(dist.path_length() - 2.0).epsilon(1e-8));
    }
}

TEST_CASE("parameter and shape validation") {
    const auto mesh = example_mesh();
    PolicyParams params = example_params(*mesh);
    SUBCASE("out-of-range parameter") {
        params.initial[0] = 1.5;
        CHECK_THROWS_AS(PathDistribution::first_order(mesh, params, 3), InvalidParamsError);
    }
    SUBCASE("lag weights must sum to one") {
        PolicyParams bad = example_params(*mesh, 2);
        bad.lag_weights << 0.5, 0.4;
        CHECK_THROWS_AS(PathDistribution::higher_order(mesh, bad, 2, 3), InvalidParamsError);
    }
    SUBCASE("path length must exceed the order for higher kinds") {
        CHECK_THROWS_AS(
            PathDistribution::higher_order(mesh, example_params(*mesh, 2), 2, 2),
            ContractError);
    }
    SUBCASE("generalized kind requires a reachability index") {
        CHECK_THROWS_AS(PathDistribution(PolicyKind::GeneralizedHigherOrder, 2, mesh,
                                         nullptr, example_params(*mesh, 2), 3),
                        ContractError);
    }
    SUBCASE("all-zero transition group is rejected") {
        PolicyParams bad = example_params(*mesh);
        bad.transition[mesh->arc_index(2, 0)] = 0.0;  // v3's only arc
        CHECK_THROWS_AS(PathDistribution::first_order(mesh, bad, 3), InvalidParamsError);
    }
}
