#include "mgv/planning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mgv/errors.hpp"

namespace mgv {

double RewardPrior::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) m += support[i] * probs[i];
    return m;
}

PlanningTree::PlanningTree(std::vector<int> parents, std::vector<RewardPrior> priors)
    : parents_(std::move(parents)), priors_(std::move(priors)) {
    if (parents_.empty()) throw std::invalid_argument("planning tree needs a root");
    if (priors_.size() != parents_.size()) {
        throw std::invalid_argument("one reward prior per node required");
    }
    if (parents_[0] != -1) throw std::invalid_argument("node 0 must be the root (parent -1)");
    children_.assign(parents_.size(), {});
    for (std::size_t i = 1; i < parents_.size(); ++i) {
        if (parents_[i] < 0 || static_cast<std::size_t>(parents_[i]) >= i) {
            throw std::invalid_argument("node " + std::to_string(i) +
                                        " must have a parent with a smaller index");
        }
        children_[static_cast<std::size_t>(parents_[i])].push_back(i);
    }
    for (std::size_t i = 0; i < priors_.size(); ++i) {
        const auto& p = priors_[i];
        if (p.support.empty() || p.support.size() != p.probs.size()) {
            throw std::invalid_argument("node " + std::to_string(i) + " has a malformed prior");
        }
        double total = 0.0;
        for (double q : p.probs) {
            if (!(q >= 0.0)) throw std::invalid_argument("negative prior probability");
            total += q;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("node " + std::to_string(i) +
                                        " prior probabilities do not sum to 1");
        }
    }
}

PlanningState PlanningState::initial(PlanningTree tree) {
    PlanningState s;
    s.values.assign(tree.size(), std::nullopt);
    s.values[0] = 0.0;
    s.tree = std::move(tree);
    return s;
}

PlanningState PlanningState::reveal(std::size_t node, double value) const {
    PlanningState next = *this;
    next.values.at(node) = value;
    return next;
}

namespace {

double node_estimate(const PlanningState& s, std::size_t i) {
    return s.values[i] ? *s.values[i] : s.tree.prior(i).mean();
}

double best_path_from(const PlanningState& s, std::size_t node) {
    double best_child = 0.0;
    bool any = false;
    for (auto c : s.tree.children(node)) {
        const double v = best_path_from(s, c);
        best_child = any ? std::max(best_child, v) : v;
        any = true;
    }
    return node_estimate(s, node) + (any ? best_child : 0.0);
}

}  // namespace

double plan_value(const PlanningState& state) { return best_path_from(state, 0); }

std::vector<std::size_t> frontier(const PlanningState& state) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < state.tree.size(); ++i) {
        if (!state.expanded(i) && state.expanded(static_cast<std::size_t>(state.tree.parent(i)))) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

bool on_frontier(const PlanningState& state, std::size_t node) {
    return node > 0 && node < state.tree.size() && !state.expanded(node) &&
           state.expanded(static_cast<std::size_t>(state.tree.parent(node)));
}

}  // namespace

double myopic_voc(const PlanningState& state, std::size_t node, double expansion_cost) {
    if (!on_frontier(state, node)) throw NodeNotOnFrontier(node);
    const auto& prior = state.tree.prior(node);
    double expected = 0.0;
    for (std::size_t k = 0; k < prior.support.size(); ++k) {
        if (prior.probs[k] == 0.0) continue;
        expected += prior.probs[k] * plan_value(state.reveal(node, prior.support[k]));
    }
    return expected - plan_value(state) - expansion_cost;
}

namespace {

// Node with the largest strictly positive myopic VOC, or none.
std::optional<std::pair<std::size_t, double>> myopic_choice(const PlanningState& state,
                                                            double cost) {
    std::optional<std::pair<std::size_t, double>> best;
    for (auto node : frontier(state)) {
        const double voc = myopic_voc(state, node, cost);
        if (voc > 0.0 && (!best || voc > best->second)) best = {node, voc};
    }
    return best;
}

}  // namespace

PlanningResult run_myopic_planner(const PlanningState& state, double expansion_cost,
                                  std::span<const double> true_values) {
    if (!(expansion_cost >= 0.0)) throw std::invalid_argument("expansion cost must be >= 0");
    if (true_values.size() != state.tree.size()) {
        throw std::invalid_argument("need one true value per node");
    }
    PlanningResult result;
    result.final_state = state;
    while (auto choice = myopic_choice(result.final_state, expansion_cost)) {
        const auto [node, voc] = *choice;
        result.final_state = result.final_state.reveal(node, true_values[node]);
        result.steps.push_back({node, voc, true_values[node], plan_value(result.final_state)});
    }
    result.net_reward = plan_value(result.final_state) -
                        expansion_cost * static_cast<double>(result.steps.size());
    return result;
}

double expected_myopic_return(const PlanningState& state, double expansion_cost) {
    const auto choice = myopic_choice(state, expansion_cost);
    if (!choice) return plan_value(state);
    const auto node = choice->first;
    const auto& prior = state.tree.prior(node);
    double expected = 0.0;
    for (std::size_t k = 0; k < prior.support.size(); ++k) {
        if (prior.probs[k] == 0.0) continue;
        expected += prior.probs[k] *
                    expected_myopic_return(state.reveal(node, prior.support[k]), expansion_cost);
    }
    return expected - expansion_cost;
}

double optimal_planning_value(const PlanningState& state, double expansion_cost) {
    double best = plan_value(state);
    for (auto node : frontier(state)) {
        const auto& prior = state.tree.prior(node);
        double q = -expansion_cost;
        for (std::size_t k = 0; k < prior.support.size(); ++k) {
            if (prior.probs[k] == 0.0) continue;
            q += prior.probs[k] *
                 optimal_planning_value(state.reveal(node, prior.support[k]), expansion_cost);
        }
        best = std::max(best, q);
    }
    return best;
}

nlohmann::json tree_to_json(const PlanningTree& tree) {
    auto nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < tree.size(); ++i) {
        nodes.push_back({{"parent", tree.parent(i)},
                         {"support", tree.prior(i).support},
                         {"probs", tree.prior(i).probs}});
    }
    return {{"nodes", std::move(nodes)}};
}

PlanningTree tree_from_json(const nlohmann::json& j) {
    std::vector<int> parents;
    std::vector<RewardPrior> priors;
    for (const auto& n : j.at("nodes")) {
        parents.push_back(n.at("parent").get<int>());
        priors.push_back({n.at("support").get<std::vector<double>>(),
                          n.at("probs").get<std::vector<double>>()});
    }
    return PlanningTree(std::move(parents), std::move(priors));
}

}  // namespace mgv
