#ifndef PATHOED_ORACLE_HPP
#define PATHOED_ORACLE_HPP

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <vector>

#include "pathoed/navmesh.hpp"
#include "pathoed/policy.hpp"

namespace pathoed {

// Black-box design quality measure.
using Utility = std::function<double(const Path&)>;

enum class OptimizeMode { Maximize, Minimize };

inline constexpr std::size_t kDefaultFeasibleCap = 10'000'000;

// Number of graph-feasible walks of length n, saturated at `saturate_at`.
// Cheap dynamic-programming count used to refuse oversized enumerations
// before they start.
double count_feasible_paths(const NavMesh& mesh, int n, double saturate_at = 1e18);

// All vertex sequences of length n whose consecutive pairs are arcs, in
// lexicographic order. Throws SupportTooLargeError (with the count estimate)
// when the feasible set exceeds `cap`.
std::vector<Path> enumerate_feasible_paths(const NavMesh& mesh, int n,
                                           std::size_t cap = kDefaultFeasibleCap);

// Exact expected utility: sum over the support of P(path) * U(path).
double exact_expectation(const PathDistribution& dist, const Utility& utility,
                         std::size_t cap = kDefaultFeasibleCap);

// Exact gradient of the expected utility in the flat coordinate layout:
// sum over the support of P(path) * U(path) * grad log P(path).
Eigen::VectorXd exact_gradient(const PathDistribution& dist, const Utility& utility,
                               std::size_t cap = kDefaultFeasibleCap);

struct BruteForceResult {
    Path best_path;
    double best_utility = 0.0;
    // Full utility multiset, sorted ascending, for tail-percentile checks.
    std::vector<double> sorted_utilities;
};

// Exhaustive optimum over all graph-feasible paths of length n.
BruteForceResult global_optimum(const NavMesh& mesh, int n, const Utility& utility,
                                OptimizeMode mode, std::size_t cap = kDefaultFeasibleCap);

// Linear-interpolation quantile of a sorted sample, p in [0, 1].
double quantile(const std::vector<double>& sorted_values, double p);

}  // namespace pathoed

#endif
