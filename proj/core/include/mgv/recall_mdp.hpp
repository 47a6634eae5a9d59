#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/rng.hpp"

namespace mgv {

/// Uniform grid over recall progress z below the recall threshold, plus one
/// absorbing "recalled" cell at index cells(). Grid point k sits at
/// min + k * step; its cell spans half a step either side, the bottom cell
/// extends to -inf and the top cell reaches up to the threshold.
class ZGrid {
public:
    ZGrid(double min, double step, double threshold);

    std::size_t cells() const noexcept { return cells_; }     // non-absorbing cells
    std::size_t recalled() const noexcept { return cells_; }  // absorbing index
    double min() const noexcept { return min_; }
    double step() const noexcept { return step_; }
    double threshold() const noexcept { return threshold_; }

    double point(std::size_t k) const;
    double lower_edge(std::size_t k) const;  // -inf for k == 0
    double upper_edge(std::size_t k) const;  // threshold for the top cell
    std::size_t cell_of(double z) const;

private:
    double min_;
    double step_;
    double threshold_;
    std::size_t cells_;
};

struct RecallMdpConfig {
    double drift_prior_mean = 0.0;
    double drift_prior_variance = 1.0;
    double evidence_variance = 1.0;
    double recall_threshold = 1.0;
    double recall_utility = 1.0;
    double search_cost = 0.05;
    int horizon = 20;
    std::optional<double> z_min;   // default -2 * threshold
    std::optional<double> z_step;  // default 3 * threshold / 40 (41 cells incl. recalled)

    void validate() const;
    ZGrid grid() const;
};

struct DriftPosterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Conjugate Gaussian posterior over the drift after t increments summing to z.
DriftPosterior recall_posterior(int t, double z, double prior_mean, double prior_variance,
                                double evidence_variance);

/// Next-cell distribution after one Search from (t, grid point `cell`).
/// Size grid.cells() + 1; the last entry is the recalled cell.
std::vector<double> recall_transition(int t, std::size_t cell, const RecallMdpConfig& config);
std::vector<double> recall_transition(int t, std::size_t cell, const RecallMdpConfig& config,
                                      const ZGrid& grid);

enum class RecallAction { Search, Stop };

struct PolicyTable {
    ZGrid grid{-2.0, 0.075, 1.0};
    int horizon = 0;
    double recall_utility = 0.0;
    /// action[t][k], value[t][k] for t in [0, horizon], k in [0, cells).
    std::vector<std::vector<RecallAction>> action;
    std::vector<std::vector<double>> value;

    /// Value including the absorbing cell (which is worth recall_utility).
    double value_at(int t, std::size_t k) const;
};

/// Exact backward induction. At t == horizon only Stop (value 0) is
/// available; ties between Search and Stop resolve to Stop.
PolicyTable solve_recall_mdp(const RecallMdpConfig& config);

/// Lowest grid z with action Search for each t, or nullopt when the column
/// is all Stop. Throws NonMonotonePolicy unless every column is Stop below
/// and Search from the threshold upward.
std::vector<std::optional<double>> stopping_threshold(const PolicyTable& policy);

struct RecallEpisode {
    bool recalled = false;
    int time = 0;  // recall time, or give-up time when not recalled
};

/// Plays the solved policy against a memory of true drift `drift`,
/// starting from z = 0 at t = 0.
RecallEpisode simulate_recall(const PolicyTable& policy, const RecallMdpConfig& config, double drift,
                              Rng& rng);

const char* to_string(RecallAction a) noexcept;
nlohmann::json policy_to_json(const PolicyTable& policy);

}  // namespace mgv
