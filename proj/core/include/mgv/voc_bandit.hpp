#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mgv/rng.hpp"

namespace mgv {

/// Gaussian posterior over linear weights with known observation noise.
struct WeightPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    double noise_variance = 1.0;

    /// Zero-mean isotropic prior.
    static WeightPosterior isotropic(std::size_t dim, double prior_variance, double noise_variance);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
    /// Throws DimensionMismatch / std::invalid_argument on inconsistent state.
    void validate() const;
};

/// Conjugate Bayesian linear-regression update on one (features, y) pair.
/// A zero feature vector leaves the posterior unchanged.
WeightPosterior posterior_update(const WeightPosterior& posterior, const Eigen::VectorXd& features,
                                 double observation);

/// One draw w ~ N(mean, covariance). Always consumes dim() normals so the
/// stream position does not depend on the covariance.
Eigen::VectorXd sample_weights(const WeightPosterior& posterior, Rng& rng);

/// <w_U, f> - gamma <w_T, f>.
double voc_estimate(const Eigen::VectorXd& utility_weights, const Eigen::VectorXd& time_weights,
                    const Eigen::VectorXd& features, double gamma);

struct StrategyModel {
    WeightPosterior utility;
    WeightPosterior time;
};

struct BanditState {
    std::vector<StrategyModel> strategies;
    double cumulative_reward = 0.0;
    double cumulative_time = 0.0;
    double prior_reward = 0.0;  // gamma prior pseudo-counts
    double prior_time = 1.0;

    static BanditState make(std::size_t n_strategies, std::size_t feature_dim,
                            double prior_variance = 1.0, double utility_noise = 0.25,
                            double time_noise = 0.25);

    /// Current opportunity-cost estimate without observing anything.
    double gamma() const noexcept {
        return (cumulative_reward + prior_reward) / (cumulative_time + prior_time);
    }
};

/// Accumulates (reward, elapsed) and returns the posterior-mean reward rate.
double update_gamma(BanditState& state, double reward, double elapsed);

struct ThompsonChoice {
    std::size_t index = 0;
    std::vector<double> sampled_vocs;
};

/// Samples one utility and one time weight vector per strategy and returns
/// the argmax of the sampled VOC; ties go to the lowest index.
ThompsonChoice thompson_select(const BanditState& state, const Eigen::VectorXd& features,
                               double gamma, Rng& rng);

/// Greedy argmax over posterior-mean VOCs (ties to the lowest index).
std::size_t greedy_select(const BanditState& state, const Eigen::VectorXd& features, double gamma);

/// Feeds one executed episode back: updates the chosen strategy's utility and
/// time posteriors and the opportunity-cost estimate. Returns the new gamma.
double observe(BanditState& state, std::size_t strategy, const Eigen::VectorXd& features,
               double utility, double elapsed);

}  // namespace mgv
