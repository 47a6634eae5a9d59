#include "mgv/lvoc.hpp"

#include <stdexcept>
#include <string>

#include "mgv/errors.hpp"

namespace mgv {

LvocWeights LvocWeights::zeros(std::size_t n_features, std::size_t n_controls) {
    const auto nf = static_cast<Eigen::Index>(n_features);
    const auto nc = static_cast<Eigen::Index>(n_controls);
    return {0.0, Eigen::VectorXd::Zero(nf), Eigen::VectorXd::Zero(nc), Eigen::MatrixXd::Zero(nf, nc),
            0.0};
}

Eigen::VectorXd LvocWeights::flatten() const {
    const auto nf = state_weights.size();
    const auto nc = control_weights.size();
    Eigen::VectorXd flat(1 + nf + nc + nf * nc);
    flat(0) = bias;
    flat.segment(1, nf) = state_weights;
    flat.segment(1 + nf, nc) = control_weights;
    Eigen::Index k = 1 + nf + nc;
    for (Eigen::Index i = 0; i < nf; ++i)
        for (Eigen::Index j = 0; j < nc; ++j) flat(k++) = interaction_weights(i, j);
    return flat;
}

LvocWeights LvocWeights::unflatten(const Eigen::VectorXd& flat, std::size_t n_features,
                                   std::size_t n_controls, double time_weight) {
    const auto nf = static_cast<Eigen::Index>(n_features);
    const auto nc = static_cast<Eigen::Index>(n_controls);
    if (flat.size() != 1 + nf + nc + nf * nc) {
        throw DimensionMismatch("flattened LVOC weights have length " + std::to_string(flat.size()));
    }
    LvocWeights w = zeros(n_features, n_controls);
    w.bias = flat(0);
    w.state_weights = flat.segment(1, nf);
    w.control_weights = flat.segment(1 + nf, nc);
    Eigen::Index k = 1 + nf + nc;
    for (Eigen::Index i = 0; i < nf; ++i)
        for (Eigen::Index j = 0; j < nc; ++j) w.interaction_weights(i, j) = flat(k++);
    w.time_weight = time_weight;
    return w;
}

double lvoc_value(const LvocWeights& weights, const Eigen::VectorXd& state_features,
                  const Eigen::VectorXd& control, double effort_cost, double elapsed) {
    if (weights.state_weights.size() != state_features.size() ||
        weights.control_weights.size() != control.size() ||
        weights.interaction_weights.rows() != state_features.size() ||
        weights.interaction_weights.cols() != control.size()) {
        throw DimensionMismatch("LVOC weights do not match |f|=" +
                                std::to_string(state_features.size()) +
                                ", |c|=" + std::to_string(control.size()));
    }
    return weights.bias + weights.state_weights.dot(state_features) +
           weights.control_weights.dot(control) +
           state_features.dot(weights.interaction_weights * control) - effort_cost -
           weights.time_weight * elapsed;
}

Eigen::VectorXd lvoc_design(const Eigen::VectorXd& f, const Eigen::VectorXd& c) {
    const auto nf = f.size();
    const auto nc = c.size();
    Eigen::VectorXd x(1 + nf + nc + nf * nc);
    x(0) = 1.0;
    x.segment(1, nf) = f;
    x.segment(1 + nf, nc) = c;
    Eigen::Index k = 1 + nf + nc;
    for (Eigen::Index i = 0; i < nf; ++i)
        for (Eigen::Index j = 0; j < nc; ++j) x(k++) = f(i) * c(j);
    return x;
}

std::vector<Eigen::VectorXd> control_grid(std::size_t dims, std::size_t resolution) {
    if (dims == 0) throw std::invalid_argument("control grid needs at least one dimension");
    if (resolution < 2) throw std::invalid_argument("control grid resolution must be >= 2");
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= resolution;
    std::vector<Eigen::VectorXd> grid;
    grid.reserve(total);
    const double step = 1.0 / static_cast<double>(resolution - 1);
    for (std::size_t n = 0; n < total; ++n) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(dims));
        std::size_t rem = n;
        for (std::size_t d = dims; d-- > 0;) {
            c(static_cast<Eigen::Index>(d)) = static_cast<double>(rem % resolution) * step;
            rem /= resolution;
        }
        grid.push_back(std::move(c));
    }
    return grid;
}

LvocLearner::LvocLearner(std::size_t n_features, std::size_t n_controls,
                         std::vector<Eigen::VectorXd> grid, double prior_variance,
                         double noise_variance, double time_weight)
    : n_features_(n_features),
      n_controls_(n_controls),
      grid_(std::move(grid)),
      time_weight_(time_weight),
      posterior_(WeightPosterior::isotropic(1 + n_features + n_controls + n_features * n_controls,
                                            prior_variance, noise_variance)) {
    if (grid_.empty()) throw std::invalid_argument("control grid must be non-empty");
    for (const auto& c : grid_) {
        if (static_cast<std::size_t>(c.size()) != n_controls) {
            throw DimensionMismatch("control grid point has wrong dimension");
        }
    }
    if (!(time_weight >= 0.0)) throw std::invalid_argument("time_weight must be >= 0");
}

void LvocLearner::observe(const Eigen::VectorXd& state_features, const Eigen::VectorXd& control,
                          double benefit) {
    posterior_ = posterior_update(posterior_, lvoc_design(state_features, control), benefit);
}

LvocWeights LvocLearner::mean_weights() const {
    return LvocWeights::unflatten(posterior_.mean, n_features_, n_controls_, time_weight_);
}

}  // namespace mgv
