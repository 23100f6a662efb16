#include "pathoed/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "pathoed/errors.hpp"
#include "pathoed/sampler.hpp"

namespace pathoed {

namespace {

constexpr double kInteriorEps = 1e-12;

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (sample_size < 1) throw ContractError("sample size must be positive");
    if (baseline_batches < 0) throw ContractError("baseline batch count must be nonnegative");
    if (!(step_size > 0.0 && step_size <= 1.0)) {
        throw ContractError("step size must lie in (0, 1]");
    }
    if (max_iterations < 0) throw ContractError("iteration cap must be nonnegative");
    if (!(update_norm_tol > 0.0)) throw ContractError("update tolerance must be positive");
    if (final_sample_size < 1) throw ContractError("final sample size must be positive");
    if (threads < 1) throw ContractError("thread count must be positive");
}

namespace {

// Shared core: estimators from precomputed utility values.
std::pair<Eigen::VectorXd, Eigen::VectorXd> estimators_from_values(
    const PathDistribution& dist, const std::vector<double>& values,
    const std::vector<Path>& paths, int threads) {
    const int count = static_cast<int>(paths.size());
    std::vector<Eigen::VectorXd> scores(count);
    parallel_for(count, threads,
                 [&](int k) { scores[k] = dist.flatten_gradient(dist.grad_log_pmf(paths[k])); });
    for (int k = 0; k < count; ++k) {
        if (!std::isfinite(values[k])) {
            throw EvaluationError("utility returned a non-finite value", paths[k]);
        }
    }

    Eigen::VectorXd g_hat = Eigen::VectorXd::Zero(dist.num_flat_params());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dist.num_flat_params());
    for (int k = 0; k < count; ++k) {
        g_hat += values[k] * scores[k];
        d += scores[k];
    }
    g_hat /= count;
    d /= count;
    return {std::move(g_hat), std::move(d)};
}

std::vector<double> evaluate_utilities(const Utility& utility, const std::vector<Path>& paths,
                                       int threads) {
    std::vector<double> values(paths.size());
    parallel_for(static_cast<int>(paths.size()), threads,
                 [&](int k) { values[k] = utility(paths[k]); });
    return values;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> stochastic_gradient(
    const PathDistribution& dist, const Utility& utility, const std::vector<Path>& paths,
    int threads) {
    if (paths.empty()) throw ContractError("stochastic gradient needs at least one path");
    return estimators_from_values(dist, evaluate_utilities(utility, paths, threads), paths,
                                  threads);
}

double optimal_baseline(const std::vector<Eigen::VectorXd>& g_hat_batches,
                        const std::vector<Eigen::VectorXd>& d_batches) {
    if (g_hat_batches.empty() || g_hat_batches.size() != d_batches.size()) {
        throw ContractError("baseline needs matching nonempty batch lists");
    }
    double numerator = 0.0;
    double denominator = 0.0;
    for (std::size_t i = 0; i < g_hat_batches.size(); ++i) {
        numerator += g_hat_batches[i].dot(d_batches[i]);
        denominator += d_batches[i].squaredNorm();
    }
    if (!(denominator > 0.0)) {
        throw BaselineUndefinedError("score-vector norms vanish; baseline undefined");
    }
    return numerator / denominator;
}

Eigen::VectorXd scaling_projector(const Eigen::VectorXd& theta, const Eigen::VectorXd& step,
                                  int direction_sign) {
    if (theta.size() != step.size()) {
        throw ContractError("projector operands must have equal sizes");
    }
    const double sign = direction_sign >= 0 ? 1.0 : -1.0;
    double s = 1.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double g = step[i];
        if (g == 0.0) continue;
        const double moved = theta[i] + sign * g;
        if (moved > 1.0) {
            s = std::min(s, (1.0 - theta[i]) / std::abs(g));
        } else if (moved < 0.0) {
            s = std::min(s, theta[i] / std::abs(g));
        }
    }
    return s * step;
}

OptimizationResult run(const PathDistribution& dist, const Utility& utility,
                       const OptimizerConfig& config) {
    config.validate();
    const int sign = config.mode == OptimizeMode::Maximize ? 1 : -1;
    const int n_params = dist.num_flat_params();
    const auto initial_size = dist.params().initial.size();
    const auto transition_size = dist.params().transition.size();
    const auto lag_size = dist.params().lag_weights.size();
    const bool renormalize_lags =
        lag_size > 0 && dist.params().lag_mode == LagMode::Optimized;

    OptimizationResult result;
    Eigen::VectorXd theta = dist.flatten_params();
    PathDistribution current = dist;

    try {
        for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
            const auto started = std::chrono::steady_clock::now();

            const RngSeed iter_seed = derive_seed(config.seed, iteration + 1);
            const auto paths = sample_paths(current, config.sample_size,
                                            derive_seed(iter_seed, 0));
            const auto values = evaluate_utilities(utility, paths, config.threads);
            auto [g_hat, d] = estimators_from_values(current, values, paths, config.threads);

            double baseline = 0.0;
            if (config.baseline_batches > 0) {
                std::vector<Eigen::VectorXd> g_batches{g_hat};
                std::vector<Eigen::VectorXd> d_batches{d};
                for (int b = 1; b < config.baseline_batches; ++b) {
                    const auto extra = sample_paths(current, config.sample_size,
                                                    derive_seed(iter_seed, b));
                    auto [gb, db] = stochastic_gradient(current, utility, extra,
                                                        config.threads);
                    g_batches.push_back(std::move(gb));
                    d_batches.push_back(std::move(db));
                }
                try {
                    baseline = optimal_baseline(g_batches, d_batches);
                } catch (const BaselineUndefinedError&) {
                    baseline = 0.0;
                }
            }

            const Eigen::VectorXd direction = g_hat - baseline * d;
            const double eta = config.schedule == StepSchedule::Constant
                                   ? config.step_size
                                   : config.step_size / std::sqrt(iteration + 1.0);
            const Eigen::VectorXd update =
                eta * scaling_projector(theta, direction, sign);

            Eigen::VectorXd next = theta + sign * update;
            // Keep coordinates that were strictly interior away from exact
            // 0/1: landing there by rounding would silently freeze them.
            for (Eigen::Index i = 0; i < initial_size + transition_size; ++i) {
                if (theta[i] > 0.0 && theta[i] < 1.0) {
                    next[i] = std::clamp(next[i], kInteriorEps, 1.0 - kInteriorEps);
                } else {
                    next[i] = theta[i];
                }
            }
            if (lag_size > 0) {
                for (Eigen::Index i = n_params - lag_size; i < n_params; ++i) {
                    next[i] = std::clamp(next[i], 0.0, 1.0);
                }
                if (renormalize_lags) {
                    const double total = next.tail(lag_size).sum();
                    if (!(total > 0.0)) {
                        throw InvalidParamsError("lag weights collapsed to zero");
                    }
                    next.tail(lag_size) /= total;
                }
            }

            const double update_norm = (next - theta).norm();
            theta = next;
            current = current.with_params(current.unflatten_params(theta));

            IterationRecord record;
            record.iteration = iteration;
            record.utilities = values;
            record.baseline = baseline;
            record.grad_norm = direction.norm();
            record.update_norm = update_norm;
            record.wall_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
            result.trace.records.push_back(std::move(record));

            if (update_norm < config.update_norm_tol) break;
        }

        result.optimal_params = current.params();
        const auto final_paths = sample_paths(current, config.final_sample_size,
                                              derive_seed(config.seed, 0));
        result.final_sample.reserve(final_paths.size());
        std::vector<double> final_values(final_paths.size());
        parallel_for(static_cast<int>(final_paths.size()), config.threads,
                     [&](int k) { final_values[k] = utility(final_paths[k]); });
        for (std::size_t k = 0; k < final_paths.size(); ++k) {
            if (!std::isfinite(final_values[k])) {
                throw EvaluationError("utility returned a non-finite value", final_paths[k]);
            }
            result.final_sample.emplace_back(final_paths[k], final_values[k]);
        }

        std::size_t best = 0;
        for (std::size_t k = 1; k < result.final_sample.size(); ++k) {
            const double v = result.final_sample[k].second;
            const double best_v = result.final_sample[best].second;
            if (config.mode == OptimizeMode::Maximize ? v > best_v : v < best_v) {
                best = k;
            }
        }
        result.best_path = result.final_sample[best].first;
        result.best_utility = result.final_sample[best].second;
    } catch (const OptimizationAborted&) {
        throw;
    } catch (const std::exception& e) {
        throw OptimizationAborted(e.what(), std::move(result.trace));
    }
    return result;
}

std::string trace_to_csv(const OptimizerTrace& trace) {
    std::ostringstream out;
    out << "iteration,mean_utility,min_utility,q25,median,q75,max_utility,"
           "baseline,grad_norm,update_norm,wall_ms\n";
    for (const auto& record : trace.records) {
        std::vector<double> sorted = record.utilities;
        std::sort(sorted.begin(), sorted.end());
        double mean = 0.0;
        for (double u : sorted) mean += u;
        mean /= sorted.empty() ? 1.0 : static_cast<double>(sorted.size());
        out << record.iteration << ',' << format_number(mean) << ','
            << format_number(sorted.front()) << ',' << format_number(quantile(sorted, 0.25))
            << ',' << format_number(quantile(sorted, 0.5)) << ','
            << format_number(quantile(sorted, 0.75)) << ',' << format_number(sorted.back())
            << ',' << format_number(record.baseline) << ','
            << format_number(record.grad_norm) << ',' << format_number(record.update_norm)
            << ',' << format_number(record.wall_ms) << '\n';
    }
    return out.str();
}

}  // namespace pathoed
