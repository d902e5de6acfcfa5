// obsgraph command-line front end.
//
// Exit codes: 0 observable / success, 1 usage error, 2 parse or model error,
// 3 not observable, 4 Lie analysis requested on a graph-only model.

#include "obsgraph/bench.hpp"
#include "obsgraph/catalog.hpp"
#include "obsgraph/dsl.hpp"
#include "obsgraph/graph.hpp"
#include "obsgraph/lie.hpp"
#include "obsgraph/report.hpp"
#include "obsgraph/synthetic.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace {

using namespace obsgraph;

enum Exit : int { ok = 0, usage = 1, model_error = 2, not_observable = 3, graph_only = 4 };

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Loaded {
    DynSystem system;
    ReportSource source;
};

std::string read_stream(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DynSystem parse_or_throw(const std::string& text, const std::string& source_name) {
    auto result = parse(text);
    for (const auto& d : result.diagnostics) std::cerr << format_diagnostic(d, source_name) << "\n";
    if (!result.ok()) throw ModelError("could not load " + source_name);
    return std::move(*result.system);
}

// "-" is stdin; an existing file wins over a catalog key of the same name.
Loaded load(const std::string& arg, bool allow_catalog) {
    if (arg == "-") return {parse_or_throw(read_stream(std::cin), "<stdin>"), {"stdin", "-"}};
    std::error_code ec;
    if (std::filesystem::is_regular_file(arg, ec)) {
        std::ifstream in(arg, std::ios::binary);
        if (!in) throw ModelError("cannot read " + arg);
        return {parse_or_throw(read_stream(in), arg), {"file", arg}};
    }
    if (allow_catalog) {
        try {
            return {get_model(arg), {"model", arg}};
        } catch (const UnknownModel&) {
        }
    }
    throw ModelError("no such file" + std::string(allow_catalog ? " or built-in model" : "") + ": " + arg);
}

std::uint64_t effective_seed(std::uint64_t flag) {
    if (const char* env = std::getenv("OBSGRAPH_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CLI::ValidationError("OBSGRAPH_SEED", std::string("not an unsigned integer: ") + env);
        }
    }
    return flag;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw ModelError("cannot write " + path);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

int cmd_check(const std::string& path) {
    auto loaded = load(path, false);
    const auto& s = loaded.system;
    std::cout << "ok: system " << s.name << " (" << s.states.size() << " states, " << s.inputs.size() << " inputs, "
              << s.outputs.size() << " outputs, " << (s.fully_symbolic() ? "symbolic" : "graph-only") << ")\n";
    return ok;
}

struct AnalyzeArgs {
    std::string model;
    bool json = false;
    bool suggest = false;
    std::string dot;
    std::string csv;
};

int cmd_analyze(const AnalyzeArgs& a) {
    auto loaded = load(a.model, true);
    const auto t0 = std::chrono::steady_clock::now();
    auto report = check_structural_observability(loaded.system);
    const double ms = elapsed_ms(t0);

    if (!a.dot.empty()) write_file(a.dot, export_digraph(report.graph, ExportFormat::Dot, &report.decomposition));
    if (!a.csv.empty()) write_file(a.csv, export_digraph(report.graph, ExportFormat::Csv));
    if (a.json) {
        auto doc = make_document("structural", loaded.source, std::nullopt, std::nullopt, ms);
        doc["structural"] = structural_payload(loaded.system, report, a.suggest);
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << structural_text(loaded.system, report, a.suggest);
    }
    return report.verdict == Verdict::Observable ? ok : not_observable;
}

struct LieArgs {
    std::string model;
    std::optional<std::size_t> order_cap;
    std::size_t samples = 5;
    double tol = 1e-8;
    std::uint64_t seed = 42;
    bool symbolic = false;
    bool json = false;
    std::optional<double> budget_s;
};

int cmd_lie(const LieArgs& a) {
    auto loaded = load(a.model, true);
    LieOptions opt;
    opt.order_cap = a.order_cap;
    opt.samples = a.samples;
    opt.tol = a.tol;
    opt.seed = effective_seed(a.seed);
    opt.mode = a.symbolic ? JacobianMode::Symbolic : JacobianMode::Dual;
    if (a.budget_s) opt.time_budget = std::chrono::duration<double>(*a.budget_s);

    LieReport report;
    try {
        report = generic_rank(loaded.system, opt);
    } catch (const GraphOnlyModel& e) {
        std::cerr << "error: " << e.what() << "\n";
        return graph_only;
    } catch (const AllSamplesSingular& e) {
        std::cerr << "error: " << e.what() << "\n";
        return model_error;
    }
    if (a.json) {
        auto doc = make_document("lie", loaded.source, opt.seed, opt.tol, report.wall_ms);
        doc["lie"] = lie_payload(loaded.system, report);
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << lie_text(loaded.system, report);
    }
    return report.verdict == LieVerdict::Observable ? ok : not_observable;
}

struct BenchArgs {
    std::vector<std::string> models;
    std::size_t repeat = 10;
    std::size_t warmup = 2;
    std::uint64_t seed = 42;
    std::string json;
};

int cmd_bench(const BenchArgs& a) {
    BenchOptions opt;
    opt.repeat = a.repeat;
    opt.warmup = a.warmup;
    opt.lie.seed = effective_seed(a.seed);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<BenchRow> rows;
    for (const auto& key : a.models) {
        if (key.starts_with("chain:")) {
            std::size_t edges = 0;
            try {
                edges = std::stoull(key.substr(6));
            } catch (const std::exception&) {
                throw CLI::ValidationError("model", "chain:N needs an edge count, got '" + key + "'");
            }
            rows.push_back(bench_model(key, chain_of_cycles(edges, opt.lie.seed), opt));
        } else {
            rows.push_back(bench_model(key, load(key, true).system, opt));
        }
    }
    std::cout << bench_markdown(rows);
    if (!a.json.empty()) {
        auto doc = make_document("bench", {"model", a.models.empty() ? "" : a.models.front()}, opt.lie.seed,
                                 opt.lie.tol, elapsed_ms(t0));
        doc["bench"] = bench_payload(rows, opt);
        write_file(a.json, doc.dump(2) + "\n");
    }
    return ok;
}

int cmd_models() {
    for (const auto& e : list_models()) {
        std::cout << e.key << "\t" << (e.symbolic ? "symbolic" : "structural") << "\t" << e.provenance << "\n";
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural and Lie-derivative observability analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(obsgraph::tool_version()));

    std::string check_path;
    auto* check = app.add_subcommand("check", "Parse and validate a model file");
    check->add_option("path", check_path, "Model file, or - for stdin")->required();

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Structural observability via root SCCs");
    analyze->add_option("model", an.model, "Model file, built-in key, or - for stdin")->required();
    analyze->add_flag("--json", an.json, "Emit a JSON report");
    analyze->add_option("--dot", an.dot, "Write the digraph in DOT format");
    analyze->add_option("--csv", an.csv, "Write the adjacency matrix as CSV");
    analyze->add_flag("--suggest", an.suggest, "Suggest one measured state per uncovered root SCC");

    LieArgs li;
    auto* lie = app.add_subcommand("lie", "Observability-matrix rank via Lie derivatives");
    lie->add_option("model", li.model, "Model file, built-in key, or - for stdin")->required();
    lie->add_option("--order-cap", li.order_cap, "Highest Lie derivative order (default n-1)");
    lie->add_option("--samples", li.samples, "Random sample points")->check(CLI::PositiveNumber);
    lie->add_option("--tol", li.tol, "Relative rank tolerance")->check(CLI::PositiveNumber);
    lie->add_option("--seed", li.seed, "Sampling seed (OBSGRAPH_SEED overrides)");
    lie->add_option("--budget", li.budget_s, "Stop raising the order after this many seconds");
    lie->add_flag("--symbolic-jacobian", li.symbolic, "Differentiate entries symbolically instead of dual sweeps");
    lie->add_flag("--json", li.json, "Emit a JSON report");

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "Time the graph and Lie analyses");
    bench->add_option("models", be.models, "Built-in keys, model files, or chain:N synthetic graphs")->required();
    bench->add_option("--repeat", be.repeat, "Timed repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--warmup", be.warmup, "Untimed warmup runs");
    bench->add_option("--seed", be.seed, "Seed (OBSGRAPH_SEED overrides)");
    bench->add_option("--json", be.json, "Also write the results as JSON to this file");

    auto* models = app.add_subcommand("models", "List the built-in models");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*check) return cmd_check(check_path);
        if (*analyze) return cmd_analyze(an);
        if (*lie) return cmd_lie(li);
        if (*bench) return cmd_bench(be);
        if (*models) return cmd_models();
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return model_error;
    }
    return usage;
}
