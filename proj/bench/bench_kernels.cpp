#include "obsgraph/catalog.hpp"
#include "obsgraph/graph.hpp"
#include "obsgraph/kernels.hpp"
#include "obsgraph/lie.hpp"
#include "obsgraph/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <tuple>
#include <memory>

namespace {

using namespace obsgraph;

// Tape, bound samples and problem for the order-k Lie terms of one model.
struct SliceSetup {
    Tape tape;
    std::vector<std::vector<double>> bound;
    kernels::SliceProblem problem;
};

std::unique_ptr<SliceSetup> make_setup(const std::string& key, std::size_t order, std::size_t samples) {
    auto s = get_model(key);
    std::vector<Expression> roots;
    for (std::size_t r = 0; r < s.outputs.size(); ++r) roots.push_back(lie_chain(s, r, order).terms.back());
    auto setup = std::unique_ptr<SliceSetup>(new SliceSetup{Tape{std::span<const Expression>(roots)}, {}, {}});
    for (const auto& env : draw_samples(s, samples, 42)) setup->bound.push_back(setup->tape.bind(env));
    setup->problem.tape = &setup->tape;
    setup->problem.bound = &setup->bound;
    for (const auto& x : s.states) setup->problem.state_slot.push_back(setup->tape.find_symbol(NodeKind::State, x));
    setup->problem.active.assign(samples, 1);
    return setup;
}

const SliceSetup& cached(const std::string& key, std::size_t order, std::size_t samples) {
    static std::map<std::tuple<std::string, std::size_t, std::size_t>, std::unique_ptr<SliceSetup>> cache;
    auto& slot = cache[{key, order, samples}];
    if (!slot) slot = make_setup(key, order, samples);
    return *slot;
}

const char* const slice_models[] = {"wscc_decentralized", "wscc_centralized_synthetic"};

template <bool Parallel>
void BM_LieSlice(benchmark::State& state) {
    const auto& setup = cached(slice_models[state.range(0)], static_cast<std::size_t>(state.range(1)),
                               static_cast<std::size_t>(state.range(2)));
    for (auto _ : state) {
        auto batch = Parallel ? kernels::lie_slice_parallel(setup.problem) : kernels::lie_slice_serial(setup.problem);
        benchmark::DoNotOptimize(batch.slices.data());
    }
    state.SetLabel(slice_models[state.range(0)]);
    state.SetItemsProcessed(state.iterations() * state.range(2));
}

void slice_args(benchmark::internal::Benchmark* b) {
    b->ArgNames({"model", "order", "samples"});
    for (int order : {1, 3}) {
        for (int samples : {5, 64}) {
            b->Args({0, order, samples});
            b->Args({1, order, samples});
        }
    }
    b->Unit(benchmark::kMicrosecond);
}

BENCHMARK(BM_LieSlice<false>)->Name("LieSlice/serial")->Apply(slice_args);
BENCHMARK(BM_LieSlice<true>)->Name("LieSlice/parallel")->Apply(slice_args);

const InferenceDigraph& chain(std::size_t edges) {
    static std::map<std::size_t, InferenceDigraph> cache;
    auto it = cache.find(edges);
    if (it == cache.end()) it = cache.emplace(edges, build_digraph(chain_of_cycles(edges))).first;
    return it->second;
}

void BM_Kosaraju(benchmark::State& state) {
    const auto& g = chain(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto d = decompose(g);
        benchmark::DoNotOptimize(d.components.data());
    }
    state.SetComplexityN(static_cast<std::int64_t>(g.edge_count()));
}
BENCHMARK(BM_Kosaraju)->RangeMultiplier(2)->Range(1 << 14, 1 << 20)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

void BM_StructuralPipeline(benchmark::State& state) {
    auto s = chain_of_cycles(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto r = check_structural_observability(s);
        benchmark::DoNotOptimize(r.verdict);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StructuralPipeline)->RangeMultiplier(4)->Range(1 << 14, 1 << 20)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
