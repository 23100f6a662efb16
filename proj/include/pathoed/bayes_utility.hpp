#ifndef PATHOED_BAYES_UTILITY_HPP
#define PATHOED_BAYES_UTILITY_HPP

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "pathoed/navmesh.hpp"
#include "pathoed/policy.hpp"

namespace pathoed {

enum class Criterion { D, A, E };

// Linear-Gaussian Bayesian inverse problem whose observation operator is
// induced by a path: observing the state at the path's node at time
// t * obs_frequency * dt for t = 1..n (single sensor). Immutable after
// construction; utility evaluation is pure.
struct LinearGaussianModel {
    Eigen::MatrixXd propagator;      // state_dim x state_dim, one model timestep
    Eigen::VectorXd prior_mean;      // state_dim
    Eigen::MatrixXd prior_cov;       // state_dim x state_dim, SPD
    Eigen::MatrixXd noise_variance;  // num mesh vertices x max observation index
    int obs_frequency = 1;
    double dt = 0.2;
    std::vector<int> vertex_to_state_index;

    int state_dim() const { return static_cast<int>(propagator.rows()); }
    int max_observations() const { return static_cast<int>(noise_variance.cols()); }

    // Shape, symmetry, positivity and factorization checks; throws
    // ContractError / NumericalError.
    void validate() const;
};

struct PosteriorSummary {
    Eigen::MatrixXd posterior_cov;
    std::optional<Eigen::VectorXd> posterior_mean;
};

// Observation operator F for a path: row t (t = 1..n) is the row of
// propagator^(t * obs_frequency) selected by vertex_to_state_index(path[t-1]).
Eigen::MatrixXd observation_operator(const LinearGaussianModel& model, const Path& path);

// Per-observation noise variances along a path (diagonal of Gamma_noise).
Eigen::VectorXd noise_variances(const LinearGaussianModel& model, const Path& path);

// Posterior covariance (F' Gamma_noise^-1 F + Gamma_prior^-1)^-1 via
// symmetric factorization; posterior mean included when data is supplied.
PosteriorSummary posterior_covariance(const LinearGaussianModel& model, const Path& path,
                                      const std::optional<Eigen::VectorXd>& data = {});

// Scalar summary of an SPD covariance: D = log-determinant, A = trace,
// E = largest eigenvalue.
double criterion_value(const Eigen::MatrixXd& posterior_cov, Criterion criterion);

// Design utility: criterion applied to the posterior covariance of the path.
// All three criteria are minimized.
double utility(const LinearGaussianModel& model, const Path& path, Criterion criterion);

// Self-contained desk-scale instance: grid mesh, explicit-stencil diffusion
// propagator, squared-exponential prior on cell centers, and noise variances
// set to a fixed fraction of a synthetic reference signal's magnitude.
struct DeskInstanceSpec {
    int rows = 3;
    int cols = 3;
    std::vector<CellRect> holes;
    double diffusion = 0.1;            // stencil weight per neighbor, in [0, 0.25]
    double prior_length_scale = 0.4;
    double prior_variance = 1.0;
    double prior_nugget = 1e-10;
    double noise_fraction = 0.05;
    int obs_frequency = 1;
    double dt = 0.2;
    int path_length = 4;
};

std::pair<NavMesh, LinearGaussianModel> build_desk_instance(const DeskInstanceSpec& spec);

}  // namespace pathoed

#endif
