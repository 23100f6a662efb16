#include "pathoed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pathoed/errors.hpp"

namespace pathoed {

double count_feasible_paths(const NavMesh& mesh, int n, double saturate_at) {
    if (n < 1) {
        throw ContractError("path length must be positive");
    }
    const int N = mesh.num_vertices();
    // walks[v] = number of feasible walks of the current length ending at v
    std::vector<double> walks(N, 1.0);
    for (int step = 1; step < n; ++step) {
        std::vector<double> next(N, 0.0);
        for (int v = 0; v < N; ++v) {
            for (int w : mesh.out_neighbors(v)) {
                next[w] += walks[v];
            }
        }
        walks = std::move(next);
        double total = 0.0;
        for (double c : walks) total += c;
        if (total >= saturate_at) return saturate_at;
    }
    double total = 0.0;
    for (double c : walks) total += c;
    return total;
}

std::vector<Path> enumerate_feasible_paths(const NavMesh& mesh, int n, std::size_t cap) {
    const double count = count_feasible_paths(mesh, n, 2.0 * static_cast<double>(cap));
    if (count > static_cast<double>(cap)) {
        throw SupportTooLargeError("feasible path count of about " +
                                       std::to_string(count) + " exceeds cap of " +
                                       std::to_string(cap),
                                   count);
    }

    std::vector<Path> paths;
    paths.reserve(static_cast<std::size_t>(count));

    // Depth-first with an explicit stack of (vertex, depth); children are
    // pushed in reverse so they pop in ascending order, which together with
    // ascending roots yields lexicographic output.
    std::vector<int> prefix;
    std::vector<std::pair<int, int>> stack;
    for (int v = mesh.num_vertices() - 1; v >= 0; --v) {
        stack.emplace_back(v, 0);
    }
    while (!stack.empty()) {
        const auto [vertex, depth] = stack.back();
        stack.pop_back();
        prefix.resize(depth);
        prefix.push_back(vertex);
        if (depth + 1 == n) {
            paths.push_back(prefix);
            continue;
        }
        const auto& nbrs = mesh.out_neighbors(vertex);
        for (auto it = nbrs.rbegin(); it != nbrs.rend(); ++it) {
            stack.emplace_back(*it, depth + 1);
        }
    }
    return paths;
}

double exact_expectation(const PathDistribution& dist, const Utility& utility,
                         std::size_t cap) {
    double expectation = 0.0;
    for (const auto& [path, probability] : dist.enumerate_support(cap)) {
        expectation += probability * utility(path);
    }
    return expectation;
}

Eigen::VectorXd exact_gradient(const PathDistribution& dist, const Utility& utility,
                               std::size_t cap) {
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(dist.num_flat_params());
    for (const auto& [path, probability] : dist.enumerate_support(cap)) {
        gradient += probability * utility(path) *
                    dist.flatten_gradient(dist.grad_log_pmf(path));
    }
    return gradient;
}

BruteForceResult global_optimum(const NavMesh& mesh, int n, const Utility& utility,
                                OptimizeMode mode, std::size_t cap) {
    BruteForceResult result;
    const auto paths = enumerate_feasible_paths(mesh, n, cap);
    result.sorted_utilities.reserve(paths.size());

    bool first = true;
    for (const auto& path : paths) {
        const double value = utility(path);
        result.sorted_utilities.push_back(value);
        const bool better = mode == OptimizeMode::Maximize ? value > result.best_utility
                                                           : value < result.best_utility;
        if (first || better) {
            result.best_path = path;
            result.best_utility = value;
            first = false;
        }
    }
    std::sort(result.sorted_utilities.begin(), result.sorted_utilities.end());
    return result;
}

double quantile(const std::vector<double>& sorted_values, double p) {
    if (sorted_values.empty()) {
        throw ContractError("quantile of an empty sample");
    }
    const double pos = p * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

}  // namespace pathoed
