#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace mgv {

/// Discrete reward distribution attached to a planning node.
struct RewardPrior {
    std::vector<double> support;
    std::vector<double> probs;

    double mean() const;
    static RewardPrior point(double value) { return {{value}, {1.0}}; }
};

/// Decision tree for the planning meta-MDP. Node 0 is the root; parents
/// always precede their children.
class PlanningTree {
public:
    PlanningTree() = default;
    /// parents[0] must be -1; parents[i] in [0, i) otherwise.
    PlanningTree(std::vector<int> parents, std::vector<RewardPrior> priors);

    std::size_t size() const noexcept { return parents_.size(); }
    int parent(std::size_t node) const { return parents_.at(node); }
    const std::vector<std::size_t>& children(std::size_t node) const { return children_.at(node); }
    const RewardPrior& prior(std::size_t node) const { return priors_.at(node); }

private:
    std::vector<int> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<RewardPrior> priors_;
};

/// Knowledge state: observed reward per node, or nullopt when unexpanded.
struct PlanningState {
    PlanningTree tree;
    std::vector<std::optional<double>> values;

    /// Root expanded with value 0, everything else unexpanded.
    static PlanningState initial(PlanningTree tree);

    bool expanded(std::size_t node) const { return values.at(node).has_value(); }
    PlanningState reveal(std::size_t node, double value) const;
};

/// Best root-to-leaf path sum, using observed values where expanded and
/// prior means elsewhere.
double plan_value(const PlanningState& state);

/// Unexpanded nodes whose parent is expanded, ascending.
std::vector<std::size_t> frontier(const PlanningState& state);

/// Exact expected improvement in plan value from expanding `node` and then
/// stopping, minus the expansion cost. Throws NodeNotOnFrontier.
double myopic_voc(const PlanningState& state, std::size_t node, double expansion_cost);

struct PlanningStep {
    std::size_t node = 0;
    double voc = 0.0;
    double revealed = 0.0;
    double plan_value = 0.0;  // after the reveal
};

struct PlanningResult {
    PlanningState final_state;
    std::vector<PlanningStep> steps;
    double net_reward = 0.0;  // plan_value(final) - cost * expansions

    std::size_t expansions() const noexcept { return steps.size(); }
};

/// Repeatedly expands the frontier node with the largest positive myopic VOC
/// (ties to the lowest index), revealing `true_values[node]`.
PlanningResult run_myopic_planner(const PlanningState& state, double expansion_cost,
                                  std::span<const double> true_values);

/// Expected net reward of the myopic policy from `state`, averaging exactly
/// over every reveal outcome. Exponential in tree size; small trees only.
double expected_myopic_return(const PlanningState& state, double expansion_cost);

/// Expected net reward of the optimal policy by exhaustive recursion over
/// expansion choices and reveal outcomes. Small trees only.
double optimal_planning_value(const PlanningState& state, double expansion_cost);

nlohmann::json tree_to_json(const PlanningTree& tree);
PlanningTree tree_from_json(const nlohmann::json& j);

}  // namespace mgv
