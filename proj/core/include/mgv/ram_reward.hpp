#pragma once

#include <stdexcept>

namespace mgv {

/// Reasoning-chain reward: the log-likelihood gain the chain buys for the
/// correct answer, minus a per-token cost.
inline double ram_reward(double logp_answer_with_chain, double logp_answer_without_chain,
                         long chain_length, double token_cost) {
    if (chain_length < 0) throw std::invalid_argument("chain_length must be >= 0");
    const double utility = logp_answer_with_chain - logp_answer_without_chain;
    const double cost = token_cost * static_cast<double>(chain_length);
    return utility - cost;
}

}  // namespace mgv
