#include "mgv/voc_bandit.hpp"

#include <stdexcept>
#include <string>

#include "mgv/errors.hpp"

namespace mgv {

WeightPosterior WeightPosterior::isotropic(std::size_t dim, double prior_variance,
                                           double noise_variance) {
    if (!(prior_variance >= 0.0)) throw std::invalid_argument("prior_variance must be >= 0");
    if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be > 0");
    const auto n = static_cast<Eigen::Index>(dim);
    return {Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n) * prior_variance,
            noise_variance};
}

void WeightPosterior::validate() const {
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw DimensionMismatch("posterior covariance is " + std::to_string(covariance.rows()) +
                                "x" + std::to_string(covariance.cols()) + " for mean of length " +
                                std::to_string(mean.size()));
    }
    if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be > 0");
}

namespace {

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                                std::to_string(b));
    }
}

}  // namespace

WeightPosterior posterior_update(const WeightPosterior& posterior, const Eigen::VectorXd& features,
                                 double observation) {
    posterior.validate();
    require_same_size(features.size(), posterior.mean.size(), "features vs weights");

    // Rank-one Kalman form: S = f'Pf + s2, K = Pf / S.
    const Eigen::VectorXd pf = posterior.covariance * features;
    const double innovation_var = features.dot(pf) + posterior.noise_variance;
    const Eigen::VectorXd gain = pf / innovation_var;
    const double residual = observation - features.dot(posterior.mean);

    WeightPosterior next = posterior;
    next.mean += gain * residual;
    next.covariance -= gain * pf.transpose();
    next.covariance = 0.5 * (next.covariance + next.covariance.transpose());
    return next;
}

Eigen::VectorXd sample_weights(const WeightPosterior& posterior, Rng& rng) {
    posterior.validate();
    const auto n = posterior.mean.size();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();

    // Symmetric square root through the eigendecomposition; tolerates
    // singular (including all-zero) covariances.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(posterior.covariance);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    if (root.isZero(0.0)) return posterior.mean;
    return posterior.mean + eig.eigenvectors() * root.asDiagonal() * z;
}

double voc_estimate(const Eigen::VectorXd& utility_weights, const Eigen::VectorXd& time_weights,
                    const Eigen::VectorXd& features, double gamma) {
    require_same_size(utility_weights.size(), features.size(), "utility weights vs features");
    require_same_size(time_weights.size(), features.size(), "time weights vs features");
    return utility_weights.dot(features) - gamma * time_weights.dot(features);
}

BanditState BanditState::make(std::size_t n_strategies, std::size_t feature_dim,
                              double prior_variance, double utility_noise, double time_noise) {
    BanditState state;
    for (std::size_t i = 0; i < n_strategies; ++i) {
        state.strategies.push_back(
            {WeightPosterior::isotropic(feature_dim, prior_variance, utility_noise),
             WeightPosterior::isotropic(feature_dim, prior_variance, time_noise)});
    }
    return state;
}

double update_gamma(BanditState& state, double reward, double elapsed) {
    if (!(elapsed > 0.0)) throw std::invalid_argument("elapsed time must be > 0");
    state.cumulative_reward += reward;
    state.cumulative_time += elapsed;
    return state.gamma();
}

ThompsonChoice thompson_select(const BanditState& state, const Eigen::VectorXd& features,
                               double gamma, Rng& rng) {
    if (state.strategies.empty()) throw std::invalid_argument("no strategies registered");
    ThompsonChoice choice;
    double best = 0.0;
    for (std::size_t s = 0; s < state.strategies.size(); ++s) {
        const auto& model = state.strategies[s];
        const auto w_u = sample_weights(model.utility, rng);
        const auto w_t = sample_weights(model.time, rng);
        const double voc = voc_estimate(w_u, w_t, features, gamma);
        choice.sampled_vocs.push_back(voc);
        if (s == 0 || voc > best) {
            best = voc;
            choice.index = s;
        }
    }
    return choice;
}

std::size_t greedy_select(const BanditState& state, const Eigen::VectorXd& features, double gamma) {
    if (state.strategies.empty()) throw std::invalid_argument("no strategies registered");
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t s = 0; s < state.strategies.size(); ++s) {
        const auto& m = state.strategies[s];
        const double voc = voc_estimate(m.utility.mean, m.time.mean, features, gamma);
        if (s == 0 || voc > best) {
            best = voc;
            arg = s;
        }
    }
    return arg;
}

double observe(BanditState& state, std::size_t strategy, const Eigen::VectorXd& features,
               double utility, double elapsed) {
    auto& model = state.strategies.at(strategy);
    model.utility = posterior_update(model.utility, features, utility);
    model.time = posterior_update(model.time, features, elapsed);
    return update_gamma(state, utility, elapsed);
}

}  // namespace mgv
