#include "pathoed/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathoed/errors.hpp"

namespace pathoed {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();
constexpr double kClampEps = 1e-12;

// Weight of one Bernoulli parameter. Exact 0 disables the entry; values in
// (0, 1) are clamped to [eps, 1-eps] before forming the odds ratio. Exact 1
// never reaches here (forced groups bypass the ratio).
double bernoulli_weight(double p) {
    if (p == 0.0) return 0.0;
    const double c = std::clamp(p, kClampEps, 1.0 - kClampEps);
    return c / (1.0 - c);
}

struct GroupCache {
    Eigen::VectorXd weights;
    Eigen::VectorXd probs;
    double weight_sum = 0.0;
    bool frozen = false;  // group contains an exact-1 (forced) entry
};

// Validate one parameter group and derive its inclusion probabilities.
// `what` names the group in error messages.
GroupCache normalize_group(const Eigen::VectorXd& values, const std::string& what) {
    GroupCache cache;
    const auto n = values.size();
    cache.weights = Eigen::VectorXd::Zero(n);
    cache.probs = Eigen::VectorXd::Zero(n);

    int forced = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = values[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvalidParamsError(what + ": parameter " + std::to_string(p) +
                                     " outside [0, 1]");
        }
        if (p == 1.0) {
            if (forced >= 0) {
                throw InvalidParamsError(what + ": more than one parameter equal to 1");
            }
            forced = static_cast<int>(i);
        }
    }
    if (forced >= 0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i != forced && values[i] != 0.0) {
                throw InvalidParamsError(
                    what + ": a parameter equal to 1 must be the unique positive entry");
            }
        }
        cache.frozen = true;
        cache.probs[forced] = 1.0;
        return cache;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        cache.weights[i] = bernoulli_weight(values[i]);
        cache.weight_sum += cache.weights[i];
    }
    if (cache.weight_sum <= 0.0) {
        throw InvalidParamsError(what + ": all parameters equal to 0");
    }
    cache.probs = cache.weights / cache.weight_sum;
    return cache;
}

// d log(pi_chosen) / d p_m within one group: (1/(1-p_m)^2) *
// (delta_{chosen,m} / w_m - 1 / sum w). Zero for structural parameters.
double group_log_grad(const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                      double weight_sum, int chosen, int m) {
    const double p = values[m];
    if (p == 0.0 || p == 1.0) return 0.0;
    const double c = std::clamp(p, kClampEps, 1.0 - kClampEps);
    const double scale = 1.0 / ((1.0 - c) * (1.0 - c));
    double term = -1.0 / weight_sum;
    if (m == chosen) {
        term += 1.0 / weights[m];
    }
    return scale * term;
}

}  // namespace

PolicyParams uniform_params(const NavMesh& mesh, double value, int lag_order,
                            LagMode lag_mode) {
    PolicyParams params;
    params.initial = Eigen::VectorXd::Constant(mesh.num_vertices(), value);
    params.transition =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.num_arcs()), value);
    params.lag_mode = lag_mode;
    if (lag_order > 0) {
        params.lag_weights = lag_mode == LagMode::FixedHarmonic
                                 ? lag_weights_fixed_harmonic(lag_order)
                                 : Eigen::VectorXd::Constant(lag_order, 1.0 / lag_order);
    }
    return params;
}

Eigen::VectorXd lag_weights_fixed_harmonic(int k) {
    if (k < 1) {
        throw ContractError("lag order must be positive");
    }
    Eigen::VectorXd lambda(k);
    double sum = 0.0;
    for (int i = 1; i <= k; ++i) sum += 1.0 / i;
    for (int i = 1; i <= k; ++i) lambda[i - 1] = (1.0 / i) / sum;
    return lambda;
}

Eigen::VectorXd initial_probabilities(const NavMesh& mesh, const PolicyParams& params) {
    if (params.initial.size() != mesh.num_vertices()) {
        throw ContractError("initial parameter count does not match vertex count");
    }
    return normalize_group(params.initial, "initial parameters").probs;
}

std::vector<double> transition_probabilities(const NavMesh& mesh, const PolicyParams& params,
                                             int from) {
    const auto& nbrs = mesh.out_neighbors(from);
    if (nbrs.empty()) {
        throw SamplingError("vertex " + std::to_string(from + 1) + " has no outgoing arcs",
                            from, -1);
    }
    const auto deg = static_cast<Eigen::Index>(nbrs.size());
    const GroupCache cache = normalize_group(
        params.transition.segment(mesh.arc_offset(from), deg),
        "transition parameters of vertex " + std::to_string(from + 1));
    return {cache.probs.data(), cache.probs.data() + deg};
}

PathDistribution::PathDistribution(PolicyKind kind, int order,
                                   std::shared_ptr<const NavMesh> mesh,
                                   std::shared_ptr<const ReachabilityIndex> reach,
                                   PolicyParams params, int path_length)
    : kind_(kind),
      order_(order),
      mesh_(std::move(mesh)),
      reach_(std::move(reach)),
      params_(std::move(params)),
      path_length_(path_length) {
    if (!mesh_) throw ContractError("mesh is required");
    const int n_vertices = mesh_->num_vertices();

    if (order_ < 1) throw ContractError("policy order must be positive");
    if (kind_ == PolicyKind::FirstOrder && order_ != 1) {
        throw ContractError("first-order policy requires order 1");
    }
    if (path_length_ < 1) throw ContractError("path length must be positive");
    if (kind_ != PolicyKind::FirstOrder && path_length_ <= order_) {
        throw ContractError("path length must exceed the policy order");
    }
    if (kind_ == PolicyKind::GeneralizedHigherOrder) {
        if (!reach_) {
            throw ContractError("generalized higher-order policy requires a reachability index");
        }
        if (reach_->order() < order_ || reach_->num_vertices() != n_vertices) {
            throw ContractError("reachability index does not cover this policy");
        }
    }

    if (params_.initial.size() != n_vertices) {
        throw InvalidParamsError("initial parameter count does not match vertex count");
    }
    if (params_.transition.size() != static_cast<Eigen::Index>(mesh_->num_arcs())) {
        throw InvalidParamsError("transition parameter count does not match arc count");
    }
    if (kind_ == PolicyKind::FirstOrder) {
        if (params_.lag_weights.size() != 0) {
            throw InvalidParamsError("first-order policy takes no lag weights");
        }
    } else {
        if (params_.lag_weights.size() != order_) {
            throw InvalidParamsError("lag weight count does not match policy order");
        }
        double sum = 0.0;
        for (Eigen::Index i = 0; i < order_; ++i) {
            const double l = params_.lag_weights[i];
            if (!(l >= 0.0 && l <= 1.0)) {
                throw InvalidParamsError("lag weights must lie in [0, 1]");
            }
            sum += l;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw InvalidParamsError("lag weights must sum to 1");
        }
    }

    const GroupCache init = normalize_group(params_.initial, "initial parameters");
    initial_probs_ = init.probs;
    initial_weights_ = init.weights;
    initial_weight_sum_ = init.weight_sum;
    initial_frozen_ = init.frozen;

    trans_probs_ = Eigen::VectorXd::Zero(params_.transition.size());
    trans_weights_ = Eigen::VectorXd::Zero(params_.transition.size());
    trans_weight_sums_ = Eigen::VectorXd::Zero(n_vertices);
    trans_frozen_.assign(n_vertices, 0);
    for (int v = 0; v < n_vertices; ++v) {
        const auto deg = static_cast<Eigen::Index>(mesh_->out_neighbors(v).size());
        if (deg == 0) continue;
        const GroupCache cache = normalize_group(
            params_.transition.segment(mesh_->arc_offset(v), deg),
            "transition parameters of vertex " + std::to_string(v + 1));
        trans_probs_.segment(mesh_->arc_offset(v), deg) = cache.probs;
        trans_weights_.segment(mesh_->arc_offset(v), deg) = cache.weights;
        trans_weight_sums_[v] = cache.weight_sum;
        trans_frozen_[v] = cache.frozen ? 1 : 0;
    }
}

PathDistribution PathDistribution::first_order(std::shared_ptr<const NavMesh> mesh,
                                               PolicyParams params, int path_length) {
    return PathDistribution(PolicyKind::FirstOrder, 1, std::move(mesh), nullptr,
                            std::move(params), path_length);
}

PathDistribution PathDistribution::higher_order(std::shared_ptr<const NavMesh> mesh,
                                                PolicyParams params, int order,
                                                int path_length) {
    return PathDistribution(PolicyKind::HigherOrder, order, std::move(mesh), nullptr,
                            std::move(params), path_length);
}

PathDistribution PathDistribution::generalized_higher_order(
    std::shared_ptr<const NavMesh> mesh, std::shared_ptr<const ReachabilityIndex> reach,
    PolicyParams params, int order, int path_length) {
    return PathDistribution(PolicyKind::GeneralizedHigherOrder, order, std::move(mesh),
                            std::move(reach), std::move(params), path_length);
}

PathDistribution PathDistribution::with_params(PolicyParams params) const {
    return PathDistribution(kind_, order_, mesh_, reach_, std::move(params), path_length_);
}

double PathDistribution::transition_probability(int from, int to) const {
    const int idx = mesh_->arc_index(from, to);
    return idx < 0 ? 0.0 : trans_probs_[idx];
}

std::vector<double> PathDistribution::transition_probabilities(int from) const {
    const auto& nbrs = mesh_->out_neighbors(from);
    if (nbrs.empty()) {
        throw SamplingError("vertex " + std::to_string(from + 1) + " has no outgoing arcs",
                            from, -1);
    }
    const double* base = trans_probs_.data() + mesh_->arc_offset(from);
    return {base, base + nbrs.size()};
}

double PathDistribution::multi_step_probability(int r, int from, int to) const {
    if (!reach_) {
        throw ContractError("multi-step probabilities require a reachability index");
    }
    if (r == 1) {
        return transition_probability(from, to);
    }
    double total = 0.0;
    for (const auto& walk : reach_->walks(r, from, to)) {
        double product = 1.0;
        for (std::size_t s = 0; s + 1 < walk.size(); ++s) {
            product *= trans_probs_[mesh_->arc_index(walk[s], walk[s + 1])];
            if (product == 0.0) break;
        }
        total += product;
    }
    return total;
}

double PathDistribution::mixture_factor(const Path& path, int t) const {
    double factor = 0.0;
    for (int lag = 1; lag <= order_; ++lag) {
        const double lambda = params_.lag_weights[lag - 1];
        if (lambda == 0.0) continue;
        const double q = kind_ == PolicyKind::HigherOrder
                             ? transition_probability(path[t - lag], path[t])
                             : multi_step_probability(lag, path[t - lag], path[t]);
        factor += lambda * q;
    }
    return factor;
}

double PathDistribution::log_pmf(const Path& path) const {
    if (static_cast<int>(path.size()) != path_length_) {
        throw ContractError("path length does not match the distribution");
    }
    for (int v : path) {
        if (v < 0 || v >= mesh_->num_vertices()) {
            throw ContractError("path vertex out of range");
        }
    }

    const double p0 = initial_probs_[path[0]];
    if (p0 == 0.0) return kLogZero;
    double log_p = std::log(p0);

    const int first_order_steps =
        kind_ == PolicyKind::FirstOrder ? path_length_ : std::min(order_, path_length_);
    for (int t = 1; t < first_order_steps; ++t) {
        const double q = transition_probability(path[t - 1], path[t]);
        if (q == 0.0) return kLogZero;
        log_p += std::log(q);
    }
    if (kind_ != PolicyKind::FirstOrder) {
        for (int t = order_; t < path_length_; ++t) {
            const double factor = mixture_factor(path, t);
            if (factor == 0.0) return kLogZero;
            log_p += std::log(factor);
        }
    }
    return log_p;
}

void PathDistribution::accumulate_initial_grad(int chosen, Eigen::VectorXd& out) const {
    if (initial_frozen_) return;
    for (int m = 0; m < mesh_->num_vertices(); ++m) {
        out[m] += group_log_grad(params_.initial, initial_weights_, initial_weight_sum_,
                                 chosen, m);
    }
}

void PathDistribution::accumulate_transition_log_grad(int from, int to, double coeff,
                                                      Eigen::VectorXd& out) const {
    if (trans_frozen_[from]) return;
    const auto& nbrs = mesh_->out_neighbors(from);
    const int offset = mesh_->arc_offset(from);
    const auto deg = static_cast<Eigen::Index>(nbrs.size());
    const auto values = params_.transition.segment(offset, deg);
    const auto weights = trans_weights_.segment(offset, deg);
    const int chosen =
        static_cast<int>(std::lower_bound(nbrs.begin(), nbrs.end(), to) - nbrs.begin());
    for (Eigen::Index m = 0; m < deg; ++m) {
        out[offset + m] +=
            coeff * group_log_grad(values, weights, trans_weight_sums_[from],
                                   chosen, static_cast<int>(m));
    }
}

LogPmfGradient PathDistribution::grad_log_pmf(const Path& path) const {
    if (log_pmf(path) == kLogZero) {
        throw UndefinedGradientError("path is outside the distribution support");
    }

    LogPmfGradient grad;
    grad.d_initial = Eigen::VectorXd::Zero(mesh_->num_vertices());
    grad.d_transition = Eigen::VectorXd::Zero(params_.transition.size());
    grad.d_lag = Eigen::VectorXd::Zero(params_.lag_weights.size());

    accumulate_initial_grad(path[0], grad.d_initial);

    if (kind_ == PolicyKind::FirstOrder) {
        for (int t = 1; t < path_length_; ++t) {
            accumulate_transition_log_grad(path[t - 1], path[t], 1.0, grad.d_transition);
        }
        return grad;
    }

    for (int t = 1; t < std::min(order_, path_length_); ++t) {
        accumulate_transition_log_grad(path[t - 1], path[t], 1.0, grad.d_transition);
    }
    const bool lag_optimized = params_.lag_mode == LagMode::Optimized;
    for (int t = order_; t < path_length_; ++t) {
        const double denom = mixture_factor(path, t);
        for (int lag = 1; lag <= order_; ++lag) {
            const double lambda = params_.lag_weights[lag - 1];
            if (kind_ == PolicyKind::HigherOrder) {
                const double q = transition_probability(path[t - lag], path[t]);
                if (lag_optimized) grad.d_lag[lag - 1] += q / denom;
                if (lambda != 0.0 && q != 0.0) {
                    accumulate_transition_log_grad(path[t - lag], path[t],
                                                   lambda * q / denom, grad.d_transition);
                }
            } else {
                double q = 0.0;
                // Expand the lag-step transition over realized walks; each
                // walk contributes its probability times the sum of per-arc
                // log-gradients (product rule).
                for (const auto& walk : reach_->walks(lag, path[t - lag], path[t])) {
                    double product = 1.0;
                    for (std::size_t s = 0; s + 1 < walk.size(); ++s) {
                        product *= trans_probs_[mesh_->arc_index(walk[s], walk[s + 1])];
                        if (product == 0.0) break;
                    }
                    if (product == 0.0) continue;
                    q += product;
                    if (lambda != 0.0) {
                        for (std::size_t s = 0; s + 1 < walk.size(); ++s) {
                            accumulate_transition_log_grad(walk[s], walk[s + 1],
                                                           lambda * product / denom,
                                                           grad.d_transition);
                        }
                    }
                }
                if (lag_optimized) grad.d_lag[lag - 1] += q / denom;
            }
        }
    }
    return grad;
}

std::vector<PathDistribution::Successor> PathDistribution::successor_distribution(
    const std::vector<int>& history) const {
    const int pos = static_cast<int>(history.size());
    std::vector<Successor> successors;

    if (kind_ == PolicyKind::FirstOrder || pos < order_) {
        const int from = history.back();
        const auto& nbrs = mesh_->out_neighbors(from);
        const int offset = mesh_->arc_offset(from);
        for (std::size_t m = 0; m < nbrs.size(); ++m) {
            const double q = trans_probs_[offset + static_cast<Eigen::Index>(m)];
            if (q > 0.0) successors.push_back({nbrs[m], q});
        }
        return successors;
    }

    // Mixture step: a successor is admissible when some lag with positive
    // weight reaches it, via an arc (Raftery) or a positive-probability walk
    // (generalized). Candidates come from connectivity, not probability
    // thresholds.
    std::vector<int> candidates;
    for (int lag = 1; lag <= order_; ++lag) {
        if (params_.lag_weights[lag - 1] == 0.0) continue;
        const int from = history[pos - lag];
        if (kind_ == PolicyKind::HigherOrder) {
            const auto& nbrs = mesh_->out_neighbors(from);
            const int offset = mesh_->arc_offset(from);
            for (std::size_t m = 0; m < nbrs.size(); ++m) {
                if (trans_probs_[offset + static_cast<Eigen::Index>(m)] > 0.0) {
                    candidates.push_back(nbrs[m]);
                }
            }
        } else {
            for (int target : reach_->targets(lag, from)) {
                if (multi_step_probability(lag, from, target) > 0.0) {
                    candidates.push_back(target);
                }
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    for (int candidate : candidates) {
        double factor = 0.0;
        for (int lag = 1; lag <= order_; ++lag) {
            const double lambda = params_.lag_weights[lag - 1];
            if (lambda == 0.0) continue;
            const double q = kind_ == PolicyKind::HigherOrder
                                 ? transition_probability(history[pos - lag], candidate)
                                 : multi_step_probability(lag, history[pos - lag], candidate);
            factor += lambda * q;
        }
        if (factor > 0.0) successors.push_back({candidate, factor});
    }
    return successors;
}

std::vector<std::pair<Path, double>> PathDistribution::enumerate_support(
    std::size_t cap) const {
    std::vector<std::pair<Path, double>> support;
    std::vector<int> prefix;

    const auto extend = [&](auto&& self, double probability) -> void {
        if (static_cast<int>(prefix.size()) == path_length_) {
            if (support.size() >= cap) {
                throw SupportTooLargeError(
                    "support exceeds cap of " + std::to_string(cap) + " paths",
                    static_cast<double>(cap));
            }
            support.emplace_back(prefix, probability);
            return;
        }
        for (const Successor& s : successor_distribution(prefix)) {
            prefix.push_back(s.vertex);
            self(self, probability * s.probability);
            prefix.pop_back();
        }
    };

    for (int v = 0; v < mesh_->num_vertices(); ++v) {
        if (initial_probs_[v] > 0.0) {
            prefix.push_back(v);
            extend(extend, initial_probs_[v]);
            prefix.pop_back();
        }
    }
    return support;
}

int PathDistribution::num_flat_params() const {
    return static_cast<int>(params_.initial.size() + params_.transition.size() +
                            params_.lag_weights.size());
}

Eigen::VectorXd PathDistribution::flatten_params() const {
    Eigen::VectorXd flat(num_flat_params());
    flat << params_.initial, params_.transition, params_.lag_weights;
    return flat;
}

PolicyParams PathDistribution::unflatten_params(const Eigen::VectorXd& flat) const {
    if (flat.size() != num_flat_params()) {
        throw ContractError("flat parameter vector has the wrong size");
    }
    PolicyParams params;
    params.initial = flat.head(params_.initial.size());
    params.transition = flat.segment(params_.initial.size(), params_.transition.size());
    params.lag_weights = flat.tail(params_.lag_weights.size());
    params.lag_mode = params_.lag_mode;
    return params;
}

Eigen::VectorXd PathDistribution::flatten_gradient(const LogPmfGradient& grad) const {
    Eigen::VectorXd flat(num_flat_params());
    flat << grad.d_initial, grad.d_transition, grad.d_lag;
    return flat;
}

}  // namespace pathoed
