#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mgv/rng.hpp"
#include "mgv/voc_bandit.hpp"

namespace mgv {

/// Linear value-of-control model over state features f and control signal c:
///   bias + <w_f, f> + <w_c, c> + f' W c - effort_cost - time_weight * elapsed
struct LvocWeights {
    double bias = 0.0;
    Eigen::VectorXd state_weights;
    Eigen::VectorXd control_weights;
    Eigen::MatrixXd interaction_weights;  // |f| x |c|
    double time_weight = 0.0;

    static LvocWeights zeros(std::size_t n_features, std::size_t n_controls);

    /// Packs the learnable part into [bias, w_f, w_c, vec(W)] (row-major W),
    /// matching lvoc_design().
    Eigen::VectorXd flatten() const;
    static LvocWeights unflatten(const Eigen::VectorXd& flat, std::size_t n_features,
                                 std::size_t n_controls, double time_weight);
};

double lvoc_value(const LvocWeights& weights, const Eigen::VectorXd& state_features,
                  const Eigen::VectorXd& control, double effort_cost, double elapsed);

/// Design vector [1, f, c, f (x) c] whose inner product with flatten() gives
/// the benefit part of lvoc_value.
Eigen::VectorXd lvoc_design(const Eigen::VectorXd& state_features, const Eigen::VectorXd& control);

/// Full grid over [0,1]^dims with `resolution` points per axis (endpoints
/// included). Row-major enumeration, last axis fastest.
std::vector<Eigen::VectorXd> control_grid(std::size_t dims, std::size_t resolution);

/// Bayesian LVOC learner: Gaussian posterior over the flattened weights,
/// Thompson selection over a finite control grid.
class LvocLearner {
public:
    LvocLearner(std::size_t n_features, std::size_t n_controls, std::vector<Eigen::VectorXd> grid,
                double prior_variance = 1.0, double noise_variance = 0.25, double time_weight = 0.0);

    struct Choice {
        std::size_t index = 0;
        Eigen::VectorXd control;
        double sampled_value = 0.0;
    };

    /// `effort_cost(c)` prices each control; `expected_time` is the elapsed
    /// time assumed for every candidate.
    template <typename CostFn>
    Choice select(const Eigen::VectorXd& state_features, CostFn&& effort_cost,
                  double expected_time, Rng& rng) const {
        const auto sample = LvocWeights::unflatten(sample_weights(posterior_, rng), n_features_,
                                                   n_controls_, time_weight_);
        return argmax(sample, state_features, effort_cost, expected_time);
    }

    template <typename CostFn>
    Choice select_greedy(const Eigen::VectorXd& state_features, CostFn&& effort_cost,
                         double expected_time) const {
        return argmax(mean_weights(), state_features, effort_cost, expected_time);
    }

    /// Regresses the observed benefit (reward before costs) on the design.
    void observe(const Eigen::VectorXd& state_features, const Eigen::VectorXd& control,
                 double benefit);

    LvocWeights mean_weights() const;
    const WeightPosterior& posterior() const noexcept { return posterior_; }
    const std::vector<Eigen::VectorXd>& grid() const noexcept { return grid_; }

private:
    template <typename CostFn>
    Choice argmax(const LvocWeights& w, const Eigen::VectorXd& f, CostFn&& cost,
                  double elapsed) const {
        Choice best;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double v = lvoc_value(w, f, grid_[i], cost(grid_[i]), elapsed);
            if (i == 0 || v > best.sampled_value) best = {i, grid_[i], v};
        }
        return best;
    }

    std::size_t n_features_;
    std::size_t n_controls_;
    std::vector<Eigen::VectorXd> grid_;
    double time_weight_;
    WeightPosterior posterior_;
};

}  // namespace mgv
