#pragma once

#include "obsgraph/lie.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace obsgraph {

struct TimingStats {
    std::size_t repeats = 0;
    double median_ms = 0.0;
    double mean_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
};

/// Runs `fn` warmup times untimed, then `repeats` times on a steady clock.
[[nodiscard]] TimingStats time_runs(const std::function<void()>& fn, std::size_t repeats, std::size_t warmup);

struct BenchOptions {
    std::size_t repeat = 10;
    std::size_t warmup = 2;
    LieOptions lie;  // `parallel` is forced off: timings are single-analysis latency
};

struct BenchRow {
    std::string model;
    std::size_t states = 0;
    std::size_t edges = 0;
    TimingStats graph;
    std::optional<TimingStats> lie;
    std::optional<std::size_t> lie_rank;
    std::string lie_note;  // why the Lie row is missing, if it is
    std::optional<double> speedup;  // lie median / graph median
};

[[nodiscard]] BenchRow bench_model(const std::string& label, const DynSystem& system, const BenchOptions& options);

/// Approaches as rows, models as columns, plus a speedup row.
[[nodiscard]] std::string bench_markdown(const std::vector<BenchRow>& rows);
[[nodiscard]] nlohmann::json bench_payload(const std::vector<BenchRow>& rows, const BenchOptions& options);

} // namespace obsgraph
