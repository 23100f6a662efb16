#ifndef PATHOED_POLICY_HPP
#define PATHOED_POLICY_HPP

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "pathoed/navmesh.hpp"

namespace pathoed {

// A design: fixed-length vertex sequence (0-based indices).
using Path = std::vector<int>;

enum class PolicyKind { FirstOrder, HigherOrder, GeneralizedHigherOrder };

enum class LagMode { Optimized, FixedHarmonic };

// Bernoulli parameters of a path policy. `transition` is sparse per-arc,
// aligned with NavMesh::arcs() via NavMesh::arc_index. `lag_weights` is empty
// for first-order policies and a length-k simplex vector otherwise.
struct PolicyParams {
    Eigen::VectorXd initial;
    Eigen::VectorXd transition;
    Eigen::VectorXd lag_weights;
    LagMode lag_mode = LagMode::Optimized;
};

// Uniform-0.5 parameters (the standard optimizer start), with harmonic lag
// weights when order > 0 lag weights are requested.
PolicyParams uniform_params(const NavMesh& mesh, double value = 0.5, int lag_order = 0,
                            LagMode lag_mode = LagMode::Optimized);

// Normalized-harmonic lag weights: lambda_i = (1/i) / sum_{m<=k} (1/m).
Eigen::VectorXd lag_weights_fixed_harmonic(int k);

// Inclusion probabilities of the initial vertex: pi_i = w_i / sum_j w_j with
// w_i = p_i / (1 - p_i). Exact 0 disables a vertex; exact 1 forces it (legal
// only as the unique positive entry). Throws InvalidParamsError on degenerate
// inputs (all zero, or multiple forced entries).
Eigen::VectorXd initial_probabilities(const NavMesh& mesh, const PolicyParams& params);

// One-step transition probabilities out of `from`, aligned with
// mesh.out_neighbors(from). Throws SamplingError for a vertex with no
// outgoing arcs and InvalidParamsError for an all-zero group.
std::vector<double> transition_probabilities(const NavMesh& mesh, const PolicyParams& params,
                                             int from);

// Gradient of a log-PMF in the same sparse layout as PolicyParams. Lag
// entries are identically zero under LagMode::FixedHarmonic. Components for
// parameters pinned at exactly 0 or 1 (disabled arcs, forced starts) are
// zero: those coordinates are structural, not optimizable.
struct LogPmfGradient {
    Eigen::VectorXd d_initial;
    Eigen::VectorXd d_transition;
    Eigen::VectorXd d_lag;
};

inline constexpr std::size_t kDefaultSupportCap = 10'000'000;

// A parametric path distribution over fixed-length trajectories. Immutable;
// log_pmf / grad_log_pmf / transition queries are pure and safe to call
// concurrently.
class PathDistribution {
public:
    // Validates all parameter and shape invariants; throws
    // InvalidParamsError / ContractError. `reach` is required (with
    // reach->order() >= order) iff kind == GeneralizedHigherOrder.
    PathDistribution(PolicyKind kind, int order, std::shared_ptr<const NavMesh> mesh,
                     std::shared_ptr<const ReachabilityIndex> reach, PolicyParams params,
                     int path_length);

    static PathDistribution first_order(std::shared_ptr<const NavMesh> mesh,
                                        PolicyParams params, int path_length);
    static PathDistribution higher_order(std::shared_ptr<const NavMesh> mesh,
                                         PolicyParams params, int order, int path_length);
    static PathDistribution generalized_higher_order(
        std::shared_ptr<const NavMesh> mesh, std::shared_ptr<const ReachabilityIndex> reach,
        PolicyParams params, int order, int path_length);

    PolicyKind kind() const { return kind_; }
    int order() const { return order_; }
    int path_length() const { return path_length_; }
    const NavMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const NavMesh> mesh_ptr() const { return mesh_; }
    std::shared_ptr<const ReachabilityIndex> reach_ptr() const { return reach_; }
    const PolicyParams& params() const { return params_; }

    // Same policy with new parameter values (mesh/kind/shape unchanged).
    PathDistribution with_params(PolicyParams params) const;

    const Eigen::VectorXd& initial_probabilities() const { return initial_probs_; }

    // Probability of arc (from, to); 0 when absent or disabled.
    double transition_probability(int from, int to) const;

    // Probabilities aligned with mesh().out_neighbors(from).
    std::vector<double> transition_probabilities(int from) const;

    // Lag-r transition probability: sum over stored walks of the product of
    // one-step probabilities along the walk. Requires a reachability index.
    double multi_step_probability(int r, int from, int to) const;

    // Natural log of the path probability; -inf outside the support.
    double log_pmf(const Path& path) const;

    // Gradient of log_pmf; throws UndefinedGradientError outside the support.
    LogPmfGradient grad_log_pmf(const Path& path) const;

    // Every positive-probability path with its exact probability, in
    // lexicographic order. Throws SupportTooLargeError above `cap`.
    std::vector<std::pair<Path, double>> enumerate_support(
        std::size_t cap = kDefaultSupportCap) const;

    // Flat coordinate layout [initial; transition; lag (higher-order kinds)].
    int num_flat_params() const;
    Eigen::VectorXd flatten_params() const;
    PolicyParams unflatten_params(const Eigen::VectorXd& flat) const;
    Eigen::VectorXd flatten_gradient(const LogPmfGradient& grad) const;

    struct Successor {
        int vertex;
        double probability;
    };

    // Admissible successors for the position following `history` (a path
    // prefix, most recent node last), with conditional probabilities. This is
    // the per-step conditional the sampler draws from.
    std::vector<Successor> successor_distribution(const std::vector<int>& history) const;

private:
    double mixture_factor(const Path& path, int t) const;  // t: 0-based position of target
    void accumulate_initial_grad(int chosen, Eigen::VectorXd& out) const;
    void accumulate_transition_log_grad(int from, int to, double coeff,
                                        Eigen::VectorXd& out) const;

    PolicyKind kind_;
    int order_;
    std::shared_ptr<const NavMesh> mesh_;
    std::shared_ptr<const ReachabilityIndex> reach_;
    PolicyParams params_;
    int path_length_;

    // Caches built at construction.
    Eigen::VectorXd initial_probs_;
    Eigen::VectorXd initial_weights_;
    double initial_weight_sum_ = 0.0;
    bool initial_frozen_ = false;  // group contains an exact-1 entry
    Eigen::VectorXd trans_probs_;  // aligned with mesh arcs
    Eigen::VectorXd trans_weights_;
    Eigen::VectorXd trans_weight_sums_;  // per vertex
    std::vector<char> trans_frozen_;     // per vertex
};

}  // namespace pathoed

#endif
