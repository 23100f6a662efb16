#include "pathoed/bayes_utility.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "pathoed/errors.hpp"

namespace pathoed {

void LinearGaussianModel::validate() const {
    const int m = state_dim();
    if (m < 1) throw ContractError("model state dimension must be positive");
    if (propagator.cols() != m) throw ContractError("propagator must be square");
    if (prior_mean.size() != m) throw ContractError("prior mean size mismatch");
    if (prior_cov.rows() != m || prior_cov.cols() != m) {
        throw ContractError("prior covariance size mismatch");
    }
    if ((prior_cov - prior_cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw NumericalError("prior covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(prior_cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("prior covariance is not positive definite");
    }
    if (obs_frequency < 1) throw ContractError("observation frequency must be positive");
    if (!(dt > 0.0)) throw ContractError("model timestep must be positive");
    if ((noise_variance.array() <= 0.0).any()) {
        throw NumericalError("noise variances must be strictly positive");
    }
    for (int idx : vertex_to_state_index) {
        if (idx < 0 || idx >= m) {
            throw ContractError("vertex-to-state index out of range");
        }
    }
}

namespace {

int state_index_of(const LinearGaussianModel& model, int vertex) {
    if (vertex < 0 || vertex >= static_cast<int>(model.vertex_to_state_index.size())) {
        throw ContractError("path vertex " + std::to_string(vertex + 1) +
                            " has no state gridpoint mapping");
    }
    return model.vertex_to_state_index[vertex];
}

}  // namespace

Eigen::MatrixXd observation_operator(const LinearGaussianModel& model, const Path& path) {
    const int n = static_cast<int>(path.size());
    const int m = model.state_dim();
    if (n < 1) throw ContractError("path must contain at least one node");
    if (n > model.max_observations()) {
        throw ContractError("path longer than the model's noise-variance table");
    }

    Eigen::MatrixXd per_obs_step = Eigen::MatrixXd::Identity(m, m);
    for (int i = 0; i < model.obs_frequency; ++i) {
        per_obs_step = model.propagator * per_obs_step;
    }

    Eigen::MatrixXd rows(n, m);
    Eigen::MatrixXd current = per_obs_step;
    for (int t = 0; t < n; ++t) {
        rows.row(t) = current.row(state_index_of(model, path[t]));
        if (t + 1 < n) current = per_obs_step * current;
    }
    return rows;
}

Eigen::VectorXd noise_variances(const LinearGaussianModel& model, const Path& path) {
    const int n = static_cast<int>(path.size());
    if (n > model.max_observations()) {
        throw ContractError("path longer than the model's noise-variance table");
    }
    Eigen::VectorXd variances(n);
    for (int t = 0; t < n; ++t) {
        state_index_of(model, path[t]);  // range check
        variances[t] = model.noise_variance(path[t], t);
    }
    return variances;
}

PosteriorSummary posterior_covariance(const LinearGaussianModel& model, const Path& path,
                                      const std::optional<Eigen::VectorXd>& data) {
    const int m = model.state_dim();
    const Eigen::MatrixXd forward = observation_operator(model, path);
    const Eigen::VectorXd variances = noise_variances(model, path);

    Eigen::LLT<Eigen::MatrixXd> prior_llt(model.prior_cov);
    if (prior_llt.info() != Eigen::Success) {
        throw NumericalError("prior covariance factorization failed");
    }
    Eigen::MatrixXd prior_precision = prior_llt.solve(Eigen::MatrixXd::Identity(m, m));
    prior_precision = 0.5 * (prior_precision + prior_precision.transpose()).eval();

    Eigen::MatrixXd precision =
        prior_precision +
        forward.transpose() * variances.cwiseInverse().asDiagonal() * forward;
    precision = 0.5 * (precision + precision.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> post_llt(precision);
    if (post_llt.info() != Eigen::Success) {
        throw NumericalError("posterior precision factorization failed");
    }

    PosteriorSummary summary;
    summary.posterior_cov = post_llt.solve(Eigen::MatrixXd::Identity(m, m));
    summary.posterior_cov =
        0.5 * (summary.posterior_cov + summary.posterior_cov.transpose()).eval();

    if (data.has_value()) {
        if (data->size() != forward.rows()) {
            throw ContractError("data size does not match the observation count");
        }
        summary.posterior_mean = post_llt.solve(
            prior_precision * model.prior_mean +
            forward.transpose() * (data->array() / variances.array()).matrix());
    }
    return summary;
}

double criterion_value(const Eigen::MatrixXd& posterior_cov, Criterion criterion) {
    switch (criterion) {
        case Criterion::A:
            return posterior_cov.trace();
        case Criterion::E: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(posterior_cov,
                                                                  Eigen::EigenvaluesOnly);
            if (solver.info() != Eigen::Success) {
                throw NumericalError("eigen decomposition failed");
            }
            return solver.eigenvalues().maxCoeff();
        }
        case Criterion::D: {
            Eigen::LLT<Eigen::MatrixXd> llt(posterior_cov);
            if (llt.info() != Eigen::Success) {
                throw NumericalError("posterior covariance factorization failed");
            }
            return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        }
    }
    throw ContractError("unknown criterion");
}

double utility(const LinearGaussianModel& model, const Path& path, Criterion criterion) {
    return criterion_value(posterior_covariance(model, path).posterior_cov, criterion);
}

std::pair<NavMesh, LinearGaussianModel> build_desk_instance(const DeskInstanceSpec& spec) {
    if (spec.diffusion < 0.0 || spec.diffusion > 0.25) {
        throw ContractError("diffusion weight must lie in [0, 0.25]");
    }
    if (!(spec.prior_length_scale > 0.0) || !(spec.prior_variance > 0.0)) {
        throw ContractError("prior kernel parameters must be positive");
    }
    if (!(spec.noise_fraction > 0.0)) {
        throw ContractError("noise fraction must be positive");
    }
    if (spec.path_length < 1) {
        throw ContractError("instance path length must be positive");
    }

    NavMesh mesh = build_grid_mesh(spec.rows, spec.cols, spec.holes);

    // The inference state lives on the full grid (holes included); the mesh
    // only restricts where the sensor may go.
    const int m = spec.rows * spec.cols;
    const auto coord_of = [&](int cell) {
        const int r = cell / spec.cols;
        const int c = cell % spec.cols;
        return std::array<double, 2>{(c + 0.5) / spec.cols, (r + 0.5) / spec.rows};
    };

    LinearGaussianModel model;
    model.obs_frequency = spec.obs_frequency;
    model.dt = spec.dt;

    // Explicit 5-point smoothing step: row-stochastic, symmetric.
    model.propagator = Eigen::MatrixXd::Zero(m, m);
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const int cell = r * spec.cols + c;
            int degree = 0;
            for (int d = 0; d < 4; ++d) {
                const int rr = r + dr[d];
                const int cc = c + dc[d];
                if (rr < 0 || rr >= spec.rows || cc < 0 || cc >= spec.cols) continue;
                model.propagator(cell, rr * spec.cols + cc) = spec.diffusion;
                ++degree;
            }
            model.propagator(cell, cell) = 1.0 - spec.diffusion * degree;
        }
    }

    model.prior_mean = Eigen::VectorXd::Zero(m);
    model.prior_cov = Eigen::MatrixXd(m, m);
    const double two_ell_sq = 2.0 * spec.prior_length_scale * spec.prior_length_scale;
    for (int a = 0; a < m; ++a) {
        const auto pa = coord_of(a);
        for (int b = 0; b < m; ++b) {
            const auto pb = coord_of(b);
            const double dx = pa[0] - pb[0];
            const double dy = pa[1] - pb[1];
            model.prior_cov(a, b) =
                spec.prior_variance * std::exp(-(dx * dx + dy * dy) / two_ell_sq);
        }
        model.prior_cov(a, a) += spec.prior_nugget;
    }

    // Synthetic reference signal: a Gaussian bump advanced by the propagator.
    // Noise variance at an observation point is a fixed fraction of the
    // reference magnitude there, floored for strict positivity.
    Eigen::VectorXd reference(m);
    for (int cell = 0; cell < m; ++cell) {
        const auto p = coord_of(cell);
        const double dx = p[0] - 0.75;
        const double dy = p[1] - 0.25;
        reference[cell] = std::exp(-(dx * dx + dy * dy) / (2.0 * 0.15 * 0.15));
    }
    const double floor_magnitude = 1e-6 * reference.cwiseAbs().maxCoeff();

    const int n_obs = spec.path_length;
    model.noise_variance = Eigen::MatrixXd(mesh.num_vertices(), n_obs);
    model.vertex_to_state_index.resize(mesh.num_vertices());

    std::vector<int> state_index_of_vertex;
    {
        std::vector<bool> blocked(static_cast<std::size_t>(m), false);
        for (const auto& h : spec.holes) {
            for (int r = h.row0; r <= h.row1; ++r) {
                for (int c = h.col0; c <= h.col1; ++c) {
                    blocked[static_cast<std::size_t>(r) * spec.cols + c] = true;
                }
            }
        }
        for (int cell = 0; cell < m; ++cell) {
            if (!blocked[cell]) state_index_of_vertex.push_back(cell);
        }
    }
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        model.vertex_to_state_index[v] = state_index_of_vertex[v];
    }

    Eigen::VectorXd state = reference;
    for (int t = 1; t <= n_obs; ++t) {
        for (int step = 0; step < spec.obs_frequency; ++step) {
            state = model.propagator * state;
        }
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            const double magnitude =
                std::max(std::abs(state[model.vertex_to_state_index[v]]), floor_magnitude);
            model.noise_variance(v, t - 1) = spec.noise_fraction * magnitude;
        }
    }

    model.validate();
    return {std::move(mesh), std::move(model)};
}

}  // namespace pathoed
