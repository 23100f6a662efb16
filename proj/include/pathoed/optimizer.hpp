#ifndef PATHOED_OPTIMIZER_HPP
#define PATHOED_OPTIMIZER_HPP

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "pathoed/oracle.hpp"
#include "pathoed/policy.hpp"
#include "pathoed/rng.hpp"

namespace pathoed {

enum class StepSchedule { Constant, InverseSqrt };

struct OptimizerConfig {
    OptimizeMode mode = OptimizeMode::Minimize;
    int sample_size = 32;       // gradient sample per iteration
    int baseline_batches = 1;   // 0 disables the baseline (b = 0)
    double step_size = 0.1;     // eta_0 in (0, 1]
    StepSchedule schedule = StepSchedule::Constant;
    int max_iterations = 300;
    double update_norm_tol = 1e-12;
    int final_sample_size = 128;
    RngSeed seed;
    int threads = 1;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    std::vector<double> utilities;
    double baseline = 0.0;
    double grad_norm = 0.0;    // 2-norm of the baselined gradient estimate
    double update_norm = 0.0;  // 2-norm of the applied parameter update
    double wall_ms = 0.0;
};

struct OptimizerTrace {
    std::vector<IterationRecord> records;
};

struct OptimizationResult {
    PolicyParams optimal_params;
    Path best_path;
    double best_utility = 0.0;
    std::vector<std::pair<Path, double>> final_sample;
    OptimizerTrace trace;
};

// Runtime failure inside the optimization loop; carries the trace of
// iterations completed before the failure so callers can flush it.
class OptimizationAborted : public std::runtime_error {
public:
    OptimizationAborted(const std::string& msg, OptimizerTrace trace)
        : std::runtime_error(msg), trace_(std::move(trace)) {}
    const OptimizerTrace& trace() const noexcept { return trace_; }

private:
    OptimizerTrace trace_;
};

// Score-function estimators over one sample: g_hat = mean of U * grad log P,
// d = mean of grad log P, both in the flat coordinate layout and reduced in
// sample order. Throws EvaluationError when the utility returns NaN/Inf.
std::pair<Eigen::VectorXd, Eigen::VectorXd> stochastic_gradient(
    const PathDistribution& dist, const Utility& utility, const std::vector<Path>& paths,
    int threads = 1);

// Variance-minimizing baseline estimate over batches:
// b = sum_i g_hat[i]' d[i] / sum_i d[i]' d[i]. Throws BaselineUndefinedError
// when the denominator vanishes.
double optimal_baseline(const std::vector<Eigen::VectorXd>& g_hat_batches,
                        const std::vector<Eigen::VectorXd>& d_batches);

// Scaling projector: returns s * step with a single scalar s chosen so the
// update theta +/- (s * step) stays inside [0, 1]^d. `direction_sign` is +1
// for ascent and -1 for descent.
Eigen::VectorXd scaling_projector(const Eigen::VectorXd& theta, const Eigen::VectorXd& step,
                                  int direction_sign);

// Projected stochastic gradient ascent/descent on the policy parameters,
// followed by a final sample from the optimal policy; returns the extremal
// design of that sample (first extremal in sample order).
OptimizationResult run(const PathDistribution& dist, const Utility& utility,
                       const OptimizerConfig& config);

// Trace CSV with one row per iteration:
// iteration, mean/min/q25/median/q75/max utility, baseline, grad_norm,
// update_norm, wall_ms.
std::string trace_to_csv(const OptimizerTrace& trace);

}  // namespace pathoed

#endif
