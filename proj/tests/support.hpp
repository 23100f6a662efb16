#ifndef PATHOED_TESTS_SUPPORT_HPP
#define PATHOED_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "pathoed/navmesh.hpp"
#include "pathoed/policy.hpp"

namespace pathoed::testing {

// The worked 5-node example: arcs 1->2, 1->3, 1->4, 2->3, 2->4, 3->1, 4->3,
// 5->2 (1-based labels).
inline std::shared_ptr<const NavMesh> example_mesh() {
    return std::make_shared<NavMesh>(
        5, std::vector<Arc>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 0}, {3, 2}, {4, 1}});
}

inline const char* example_mesh_text() {
    return "# 5-node example mesh\n5\n1 2\n1 3\n1 4\n2 3\n2 4\n3 1\n4 3\n5 2\n";
}

// All parameters 1/2 except the 1->4 transition parameter, which is 4/5.
inline PolicyParams example_params(const NavMesh& mesh, int lag_order = 0,
                                   LagMode lag_mode = LagMode::FixedHarmonic) {
    PolicyParams params = uniform_params(mesh, 0.5, lag_order, lag_mode);
    params.transition[mesh.arc_index(0, 3)] = 0.8;
    return params;
}

// Published first-order PMF over the 12 support paths of length 3.
inline std::map<Path, double> example_first_order_pmf() {
    return {
        {{0, 1, 2}, 1.0 / 60}, {{0, 1, 3}, 1.0 / 60},  {{0, 2, 0}, 2.0 / 60},
        {{0, 3, 2}, 8.0 / 60}, {{1, 2, 0}, 6.0 / 60},  {{1, 3, 2}, 6.0 / 60},
        {{2, 0, 1}, 2.0 / 60}, {{2, 0, 2}, 2.0 / 60},  {{2, 0, 3}, 8.0 / 60},
        {{3, 2, 0}, 12.0 / 60}, {{4, 1, 2}, 6.0 / 60}, {{4, 1, 3}, 6.0 / 60},
    };
}

// Published two-step transition matrix of the example parameters.
inline Eigen::MatrixXd example_two_step_matrix() {
    Eigen::MatrixXd m(5, 5);
    m << 2.0 / 12, 0, 9.0 / 12, 1.0 / 12, 0,
         1.0 / 2, 0, 1.0 / 2, 0, 0,
         0, 2.0 / 12, 2.0 / 12, 8.0 / 12, 0,
         1, 0, 0, 0, 0,
         0, 0, 1.0 / 2, 1.0 / 2, 0;
    return m;
}

// Random connected-enough mesh: every vertex gets at least one outgoing arc.
inline std::shared_ptr<const NavMesh> random_mesh(std::mt19937_64& rng, int max_vertices = 12) {
    std::uniform_int_distribution<int> size_dist(3, max_vertices);
    const int n = size_dist(rng);
    std::vector<Arc> arcs;
    std::uniform_int_distribution<int> degree_dist(1, std::min(3, n - 1));
    std::uniform_int_distribution<int> vertex_dist(0, n - 1);
    for (int v = 0; v < n; ++v) {
        const int degree = degree_dist(rng);
        for (int d = 0; d < degree; ++d) {
            int w = vertex_dist(rng);
            while (w == v) w = vertex_dist(rng);
            arcs.emplace_back(v, w);
        }
    }
    return std::make_shared<NavMesh>(n, std::move(arcs));
}

// Parameters uniform in (0.05, 0.95), per the gradient-check contract; lag
// weights random on the interior of the simplex with an exact unit sum.
inline PolicyParams random_params(const NavMesh& mesh, std::mt19937_64& rng,
                                  int lag_order = 0,
                                  LagMode lag_mode = LagMode::Optimized) {
    std::uniform_real_distribution<double> value_dist(0.05, 0.95);
    PolicyParams params;
    params.initial = Eigen::VectorXd::NullaryExpr(
        mesh.num_vertices(), [&](Eigen::Index) { return value_dist(rng); });
    params.transition = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(mesh.num_arcs()),
        [&](Eigen::Index) { return value_dist(rng); });
    params.lag_mode = lag_mode;
    if (lag_order > 0) {
        if (lag_mode == LagMode::FixedHarmonic) {
            params.lag_weights = lag_weights_fixed_harmonic(lag_order);
        } else {
            Eigen::VectorXd raw = Eigen::VectorXd::NullaryExpr(
                lag_order, [&](Eigen::Index) { return 0.2 + 0.8 * value_dist(rng); });
            raw /= raw.sum();
            raw[lag_order - 1] = 1.0 - raw.head(lag_order - 1).sum();
            params.lag_weights = raw;
        }
    }
    return params;
}

}  // namespace pathoed::testing

#endif
