#include "obsgraph/bench.hpp"

#include "obsgraph/graph.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

namespace obsgraph {

using nlohmann::json;

namespace {

std::string ms(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, v < 10.0 ? "%.4f ms" : "%.1f ms", v);
    return buf;
}

json stats_json(const TimingStats& t) {
    return {{"repeats", t.repeats}, {"median_ms", t.median_ms}, {"mean_ms", t.mean_ms}, {"min_ms", t.min_ms}, {"max_ms", t.max_ms}};
}

} // namespace

TimingStats time_runs(const std::function<void()>& fn, std::size_t repeats, std::size_t warmup) {
    for (std::size_t i = 0; i < warmup; ++i) fn();
    std::vector<double> samples;
    samples.reserve(repeats);
    for (std::size_t i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    TimingStats t;
    t.repeats = repeats;
    if (samples.empty()) return t;
    std::sort(samples.begin(), samples.end());
    const std::size_t m = samples.size() / 2;
    t.median_ms = samples.size() % 2 ? samples[m] : 0.5 * (samples[m - 1] + samples[m]);
    t.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    t.min_ms = samples.front();
    t.max_ms = samples.back();
    return t;
}

BenchRow bench_model(const std::string& label, const DynSystem& system, const BenchOptions& options) {
    BenchRow row;
    row.model = label;
    row.states = system.states.size();
    row.edges = build_digraph(system).edge_count();
    row.graph = time_runs([&] { (void)check_structural_observability(system); }, options.repeat, options.warmup);
    if (!system.fully_symbolic()) {
        row.lie_note = "graph-only model";
        return row;
    }
    LieOptions lie = options.lie;
    lie.parallel = false;
    try {
        row.lie_rank = generic_rank(system, lie).final_rank;
        row.lie = time_runs([&] { (void)generic_rank(system, lie); }, options.repeat, options.warmup);
    } catch (const AllSamplesSingular& e) {
        row.lie_note = e.what();
        return row;
    }
    if (row.graph.median_ms > 0.0) row.speedup = row.lie->median_ms / row.graph.median_ms;
    return row;
}

std::string bench_markdown(const std::vector<BenchRow>& rows) {
    std::string out = "| Approach |";
    for (const auto& r : rows) out += " " + r.model + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < rows.size(); ++i) out += "---|";
    out += "\n| Lie (median) |";
    for (const auto& r : rows) out += " " + (r.lie ? ms(r.lie->median_ms) : "n/a (" + r.lie_note + ")") + " |";
    out += "\n| Graph (median) |";
    for (const auto& r : rows) out += " " + ms(r.graph.median_ms) + " |";
    out += "\n| Speedup |";
    for (const auto& r : rows) {
        char buf[32];
        if (r.speedup) {
            std::snprintf(buf, sizeof buf, "%.0fx", *r.speedup);
            out += std::string(" ") + buf + " |";
        } else {
            out += " n/a |";
        }
    }
    out += "\n";
    return out;
}

json bench_payload(const std::vector<BenchRow>& rows, const BenchOptions& options) {
    json p;
    p["repeat"] = options.repeat;
    p["warmup"] = options.warmup;
    json list = json::array();
    for (const auto& r : rows) {
        json j;
        j["model"] = r.model;
        j["states"] = r.states;
        j["edges"] = r.edges;
        j["graph"] = stats_json(r.graph);
        j["lie"] = r.lie ? stats_json(*r.lie) : json(nullptr);
        j["lie_rank"] = r.lie_rank ? json(*r.lie_rank) : json(nullptr);
        j["lie_note"] = r.lie_note.empty() ? json(nullptr) : json(r.lie_note);
        j["speedup"] = r.speedup ? json(*r.speedup) : json(nullptr);
        list.push_back(std::move(j));
    }
    p["rows"] = std::move(list);
    return p;
}

} // namespace obsgraph
