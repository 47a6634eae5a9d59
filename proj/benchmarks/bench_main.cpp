#include <benchmark/benchmark.h>

#include <map>

#include "mgv/acquisition.hpp"
#include "mgv/planning.hpp"
#include "mgv/recall_mdp.hpp"
#include "mgv/rng.hpp"
#include "mgv/voc_bandit.hpp"

namespace {

void BM_SolveRecallMdp(benchmark::State& state) {
    mgv::RecallMdpConfig c;
    c.horizon = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mgv::solve_recall_mdp(c));
}
BENCHMARK(BM_SolveRecallMdp)->Arg(5)->Arg(20)->Arg(50);

void BM_PosteriorUpdate(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    auto post = mgv::WeightPosterior::isotropic(dim, 1.0, 0.25);
    const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(dim), 0.1, 1.0);
    for (auto _ : state) {
        post = mgv::posterior_update(post, f, 0.5);
        benchmark::DoNotOptimize(post.mean.data());
    }
}
BENCHMARK(BM_PosteriorUpdate)->Arg(2)->Arg(8)->Arg(32);

mgv::PlanningTree binary_tree(int depth) {
    std::vector<int> parents{-1};
    std::vector<mgv::RewardPrior> priors{mgv::RewardPrior::point(0.0)};
    std::size_t level_start = 0, level_size = 1;
    for (int d = 0; d < depth; ++d) {
        for (std::size_t i = 0; i < level_size; ++i) {
            for (int k = 0; k < 2; ++k) {
                parents.push_back(static_cast<int>(level_start + i));
                priors.push_back({{-1.0, 0.0, 2.0}, {0.3, 0.4, 0.3}});
            }
        }
        level_start += level_size;
        level_size *= 2;
    }
    return mgv::PlanningTree(parents, priors);
}

void BM_MyopicVoc(benchmark::State& state) {
    const auto s = mgv::PlanningState::initial(binary_tree(static_cast<int>(state.range(0))));
    for (auto _ : state) {
        for (std::size_t node : mgv::frontier(s)) benchmark::DoNotOptimize(mgv::myopic_voc(s, node, 0.1));
    }
}
BENCHMARK(BM_MyopicVoc)->Arg(2)->Arg(4)->Arg(6);

void BM_AllocateResources(benchmark::State& state) {
    mgv::Rng rng(1);
    std::map<int, double> signals;
    for (int i = 0; i < state.range(0); ++i) signals.emplace(i, rng.uniform());
    for (auto _ : state) benchmark::DoNotOptimize(mgv::allocate_resources(signals, 1.0));
}
BENCHMARK(BM_AllocateResources)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
