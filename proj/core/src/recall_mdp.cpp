#include "mgv/recall_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mgv/errors.hpp"

namespace mgv {

ZGrid::ZGrid(double min, double step, double threshold)
    : min_(min), step_(step), threshold_(threshold) {
    if (!(step > 0.0)) throw std::invalid_argument("z grid step must be > 0");
    if (!(min < threshold)) throw std::invalid_argument("z grid min must lie below the threshold");
    const double span = (threshold - min) / step;
    const double rounded = std::round(span);
    if (std::abs(span - rounded) > 1e-6 || rounded < 1.0) {
        throw std::invalid_argument("z grid step must divide (threshold - min) evenly");
    }
    cells_ = static_cast<std::size_t>(rounded);
}

double ZGrid::point(std::size_t k) const { return min_ + static_cast<double>(k) * step_; }

double ZGrid::lower_edge(std::size_t k) const {
    if (k == 0) return -std::numeric_limits<double>::infinity();
    return point(k) - 0.5 * step_;
}

double ZGrid::upper_edge(std::size_t k) const {
    if (k + 1 == cells_) return threshold_;
    return point(k) + 0.5 * step_;
}

std::size_t ZGrid::cell_of(double z) const {
    if (z >= threshold_) return cells_;
    const double k = std::floor((z - min_) / step_ + 0.5);
    if (k <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(k), cells_ - 1);
}

void RecallMdpConfig::validate() const {
    if (!(drift_prior_variance > 0.0)) throw std::invalid_argument("drift_prior_variance must be > 0");
    if (!(evidence_variance > 0.0)) throw std::invalid_argument("evidence_variance must be > 0");
    if (!(recall_threshold > 0.0)) throw std::invalid_argument("recall_threshold must be > 0");
    if (!(recall_utility >= 0.0)) throw std::invalid_argument("recall_utility must be >= 0");
    if (!(search_cost >= 0.0)) throw std::invalid_argument("search_cost must be >= 0");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    (void)grid();
}

ZGrid RecallMdpConfig::grid() const {
    const double lo = z_min.value_or(-2.0 * recall_threshold);
    const double step = z_step.value_or(3.0 * recall_threshold / 40.0);
    return ZGrid(lo, step, recall_threshold);
}

DriftPosterior recall_posterior(int t, double z, double prior_mean, double prior_variance,
                                double evidence_variance) {
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    if (t == 0) return {prior_mean, prior_variance};
    const double precision = 1.0 / prior_variance + static_cast<double>(t) / evidence_variance;
    const double mean = (prior_mean / prior_variance + z / evidence_variance) / precision;
    return {mean, 1.0 / precision};
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::vector<double> recall_transition(int t, std::size_t cell, const RecallMdpConfig& config,
                                      const ZGrid& grid) {
    if (cell >= grid.cells()) throw std::invalid_argument("transition from the absorbing cell");
    const double z = grid.point(cell);
    const auto post = recall_posterior(t, z, config.drift_prior_mean, config.drift_prior_variance,
                                       config.evidence_variance);
    const double sd = std::sqrt(config.evidence_variance + post.variance);

    // Mass per cell as differences of the CDF at consecutive upper edges, so
    // the total telescopes to exactly 1 - 0.
    std::vector<double> mass(grid.cells() + 1, 0.0);
    double below = 0.0;
    for (std::size_t k = 0; k < grid.cells(); ++k) {
        const double cdf = normal_cdf((grid.upper_edge(k) - z - post.mean) / sd);
        mass[k] = cdf - below;
        below = cdf;
    }
    mass[grid.recalled()] = 1.0 - below;
    return mass;
}

std::vector<double> recall_transition(int t, std::size_t cell, const RecallMdpConfig& config) {
    return recall_transition(t, cell, config, config.grid());
}

double PolicyTable::value_at(int t, std::size_t k) const {
    if (k == grid.recalled()) return recall_utility;
    return value.at(static_cast<std::size_t>(t)).at(k);
}

PolicyTable solve_recall_mdp(const RecallMdpConfig& config) {
    config.validate();
    PolicyTable table;
    table.grid = config.grid();
    table.horizon = config.horizon;
    table.recall_utility = config.recall_utility;
    const std::size_t n = table.grid.cells();
    const auto T = static_cast<std::size_t>(config.horizon);

    table.action.assign(T + 1, std::vector<RecallAction>(n, RecallAction::Stop));
    table.value.assign(T + 1, std::vector<double>(n, 0.0));

    for (std::size_t t = T; t-- > 0;) {
        const auto& next = table.value[t + 1];
        for (std::size_t k = 0; k < n; ++k) {
            const auto p = recall_transition(static_cast<int>(t), k, config, table.grid);
            double cont = -config.search_cost + p[n] * config.recall_utility;
            for (std::size_t j = 0; j < n; ++j) cont += p[j] * next[j];
            if (cont > 0.0) {
                table.action[t][k] = RecallAction::Search;
                table.value[t][k] = cont;
            }
        }
    }
    return table;
}

std::vector<std::optional<double>> stopping_threshold(const PolicyTable& policy) {
    std::vector<std::optional<double>> out;
    out.reserve(policy.action.size());
    for (std::size_t t = 0; t < policy.action.size(); ++t) {
        const auto& column = policy.action[t];
        const auto first = std::find(column.begin(), column.end(), RecallAction::Search);
        if (first == column.end()) {
            out.push_back(std::nullopt);
            continue;
        }
        if (std::find(first, column.end(), RecallAction::Stop) != column.end()) {
            throw NonMonotonePolicy(t);
        }
        out.push_back(policy.grid.point(static_cast<std::size_t>(first - column.begin())));
    }
    return out;
}

RecallEpisode simulate_recall(const PolicyTable& policy, const RecallMdpConfig& config, double drift,
                              Rng& rng) {
    const double sd = std::sqrt(config.evidence_variance);
    double z = 0.0;
    for (int t = 0;; ++t) {
        if (z >= policy.grid.threshold()) return {true, t};
        if (t >= policy.horizon) return {false, t};
        const auto k = policy.grid.cell_of(z);
        if (policy.action[static_cast<std::size_t>(t)][k] == RecallAction::Stop) return {false, t};
        z += rng.normal(drift, sd);
    }
}

const char* to_string(RecallAction a) noexcept {
    return a == RecallAction::Search ? "search" : "stop";
}

nlohmann::json policy_to_json(const PolicyTable& policy) {
    auto cells = nlohmann::json::array();
    for (std::size_t t = 0; t < policy.action.size(); ++t) {
        for (std::size_t k = 0; k < policy.grid.cells(); ++k) {
            cells.push_back({{"t", t},
                             {"z", policy.grid.point(k)},
                             {"action", to_string(policy.action[t][k])},
                             {"value", policy.value[t][k]}});
        }
    }
    return {{"horizon", policy.horizon},
            {"recall_threshold", policy.grid.threshold()},
            {"recall_utility", policy.recall_utility},
            {"z_min", policy.grid.min()},
            {"z_step", policy.grid.step()},
            {"cells", std::move(cells)}};
}

}  // namespace mgv
