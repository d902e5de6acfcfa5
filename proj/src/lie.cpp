#include "obsgraph/lie.hpp"

#include "obsgraph/kernels.hpp"
#include "obsgraph/tape.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace obsgraph {

namespace {

void require_symbolic(const DynSystem& system) {
    if (!system.fully_symbolic()) throw GraphOnlyModel(system.name);
}

const Expression& expr_of(const RightHandSide& rhs) { return std::get<Expression>(rhs); }

// One step of the chain: sum_i d(expr)/dx_i * f_i, zero partials skipped.
Expression lie_step(const DynSystem& system, const Expression& expr) {
    Expression acc;
    bool any = false;
    for (std::size_t i = 0; i < system.states.size(); ++i) {
        Expression partial = differentiate(expr, system.states[i]);
        if (partial.is_zero()) continue;
        Expression term = partial * expr_of(system.derivatives[i]);
        acc = any ? acc + term : term;
        any = true;
    }
    return simplify(acc);
}

std::vector<Expression> output_exprs(const DynSystem& system) {
    std::vector<Expression> out;
    out.reserve(system.outputs.size());
    for (const auto& o : system.outputs) out.push_back(expr_of(o.rhs));
    return out;
}

// Uniform on [lo, hi) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

constexpr int max_redraws = 64;
constexpr double min_denominator = 1e-3;

bool sample_is_regular(const Tape& tape, const Environment& env) {
    if (tape.root_count() == 0) return true;
    Tape::Workspace ws;
    std::vector<double> out(tape.root_count());
    double min_den = 0.0;
    try {
        tape.run(tape.bind(env), out, ws, &min_den);
    } catch (const EvaluationError&) {
        return false;
    }
    if (min_den < min_denominator) return false;
    return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
}

std::string describe_failure(const DynSystem& system, std::size_t order, std::size_t column, const EvaluationError& e) {
    std::size_t root = 0;
    const std::string& path = e.path();
    if (system.outputs.size() > 1 && path.size() > 1 && path[0] == '[') {
        root = std::stoul(path.substr(1));
    }
    SampleEvaluationError wrapped(root < system.outputs.size() ? system.outputs[root].name : "?", order,
                                  system.states[column], e);
    return wrapped.what();
}

std::vector<std::optional<std::size_t>> state_slots(const Tape& tape, const DynSystem& system) {
    std::vector<std::optional<std::size_t>> slots;
    slots.reserve(system.states.size());
    for (const auto& x : system.states) slots.push_back(tape.find_symbol(NodeKind::State, x));
    return slots;
}

// Each row scaled to unit max-norm. Row scaling does not change rank, and it
// keeps high-order rows with large magnitudes from drowning the low orders
// under a single global threshold.
void append_equilibrated(Matrix& stacked, const Matrix& slice) {
    const std::size_t start = stacked.rows;
    stacked.rows += slice.rows;
    stacked.cols = slice.cols;
    stacked.data.insert(stacked.data.end(), slice.data.begin(), slice.data.end());
    for (std::size_t i = start; i < stacked.rows; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < stacked.cols; ++j) m = std::max(m, std::abs(stacked(i, j)));
        if (m == 0.0 || !std::isfinite(m)) continue;
        for (std::size_t j = 0; j < stacked.cols; ++j) stacked(i, j) /= m;
    }
}

// Symbolic-Jacobian slice: every entry differentiated symbolically, then
// evaluated. Same layout and failure reporting as the dual kernels.
kernels::SliceBatch symbolic_slice(const DynSystem& system, const std::vector<Expression>& order_exprs,
                                   const std::vector<Environment>& samples, const std::vector<char>& active) {
    const std::size_t p = order_exprs.size();
    const std::size_t n = system.states.size();
    std::vector<Expression> entries;
    entries.reserve(p * n);
    for (const auto& e : order_exprs) {
        for (const auto& x : system.states) entries.push_back(differentiate(e, x));
    }
    Tape tape{std::span<const Expression>(entries)};
    kernels::SliceBatch out;
    out.slices.resize(samples.size());
    out.failures.resize(samples.size());
    Tape::Workspace ws;
    std::vector<double> values(entries.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (!active[s]) continue;
        out.slices[s] = Matrix(p, n);
        try {
            tape.run(tape.bind(samples[s]), values, ws);
        } catch (const EvaluationError& e) {
            std::size_t root = 0;
            std::string rest = e.path();
            if (entries.size() > 1 && rest.size() > 1 && rest[0] == '[') {
                root = std::stoul(rest.substr(1));
                rest = rest.substr(rest.find(']') + 1);
            }
            // Re-index the path by output so it reads like a dual-mode failure.
            std::string path = p > 1 ? "[" + std::to_string(root / n) + "]" + rest : rest;
            out.failures[s] = kernels::SliceFailure{root % n, EvaluationError(e.kind(), e.detail(), path)};
            continue;
        }
        std::copy(values.begin(), values.end(), out.slices[s].data.begin());
    }
    return out;
}

} // namespace

SampleEvaluationError::SampleEvaluationError(std::string out, std::size_t k, std::string x, const EvaluationError& e)
    : std::runtime_error("output " + out + ", order " + std::to_string(k) + ", state " + x + ": " + e.what()),
      output(std::move(out)), order(k), state(std::move(x)), cause(e) {}

Expression lie_derivative(const DynSystem& system, const Expression& expr, std::size_t k) {
    require_symbolic(system);
    Expression current = expr;
    for (std::size_t i = 0; i < k; ++i) current = lie_step(system, current);
    return current;
}

LieChain lie_chain(const DynSystem& system, std::size_t output_index, std::size_t max_order) {
    require_symbolic(system);
    LieChain chain{system.outputs.at(output_index).name, {}};
    chain.terms.push_back(expr_of(system.outputs[output_index].rhs));
    for (std::size_t k = 0; k < max_order; ++k) chain.terms.push_back(lie_step(system, chain.terms.back()));
    return chain;
}

Matrix observability_matrix(const DynSystem& system, std::size_t max_order, const Environment& sample) {
    require_symbolic(system);
    const std::size_t p = system.outputs.size();
    const std::size_t n = system.states.size();
    Matrix out((max_order + 1) * p, n);
    std::vector<Expression> current = output_exprs(system);
    std::vector<std::vector<double>> bound(1);
    for (std::size_t k = 0; k <= max_order; ++k) {
        if (k > 0) {
            for (auto& e : current) e = lie_step(system, e);
        }
        Tape tape{std::span<const Expression>(current)};
        bound[0] = tape.bind(sample);
        kernels::SliceProblem pb{&tape, &bound, state_slots(tape, system), {1}};
        auto batch = kernels::lie_slice_serial(pb);
        if (const auto& f = batch.failures[0]) {
            std::size_t root = 0;
            if (p > 1 && f->error.path().size() > 1 && f->error.path()[0] == '[') root = std::stoul(f->error.path().substr(1));
            throw SampleEvaluationError(system.outputs[root].name, k, system.states[f->column], f->error);
        }
        std::copy(batch.slices[0].data.begin(), batch.slices[0].data.end(),
                  out.data.begin() + static_cast<std::ptrdiff_t>(k * p * n));
    }
    return out;
}

std::vector<std::vector<Expression>> symbolic_observability_matrix(const DynSystem& system, std::size_t max_order) {
    require_symbolic(system);
    std::vector<std::vector<Expression>> rows;
    std::vector<Expression> current = output_exprs(system);
    for (std::size_t k = 0; k <= max_order; ++k) {
        if (k > 0) {
            for (auto& e : current) e = lie_step(system, e);
        }
        for (const auto& e : current) {
            std::vector<Expression> row;
            row.reserve(system.states.size());
            for (const auto& x : system.states) row.push_back(differentiate(e, x));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string_view to_string(LieVerdict v) {
    return v == LieVerdict::Observable ? "observable" : "not-observable-up-to-order";
}

std::vector<Environment> draw_samples(const DynSystem& system, std::size_t count, std::uint64_t seed) {
    std::vector<Expression> checked;
    if (system.fully_symbolic()) {
        for (const auto& d : system.derivatives) checked.push_back(expr_of(d));
        for (const auto& o : system.outputs) checked.push_back(expr_of(o.rhs));
    }
    Tape tape{std::span<const Expression>(checked)};

    std::mt19937_64 rng(seed);
    std::vector<Environment> samples;
    samples.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Environment env;
        for (int attempt = 0; attempt <= max_redraws; ++attempt) {
            env = {};
            for (const auto& x : system.states) env.states[x] = uniform(rng, -1.0, 1.0);
            for (const auto& u : system.inputs) env.inputs[u] = uniform(rng, -1.0, 1.0);
            for (const auto& p : system.parameters) {
                env.parameters[p.name] = p.default_value ? *p.default_value : uniform(rng, 0.5, 1.5);
            }
            if (sample_is_regular(tape, env)) break;
        }
        samples.push_back(std::move(env));
    }
    return samples;
}

LieReport generic_rank(const DynSystem& system, const LieOptions& options) {
    require_symbolic(system);
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = system.states.size();
    const std::size_t count = options.samples;

    LieReport report;
    report.n = n;
    report.order_cap = options.order_cap.value_or(n > 0 ? n - 1 : 0);
    report.seed = options.seed;
    report.tolerance = options.tol;
    report.mode = options.mode;
    report.samples = draw_samples(system, count, options.seed);
    report.rank_by_sample.resize(count);
    report.sample_failures.resize(count);

    if (count == 0) throw AllSamplesSingular("no samples requested");

    std::vector<char> active(count, 1);
    std::vector<Matrix> stacked(count, Matrix(0, n));
    std::vector<Expression> current = output_exprs(system);

    for (std::size_t k = 0;; ++k) {
        if (k > 0) {
            for (auto& e : current) e = lie_step(system, e);
        }

        kernels::SliceBatch batch;
        if (options.mode == JacobianMode::Symbolic) {
            batch = symbolic_slice(system, current, report.samples, active);
        } else {
            Tape tape{std::span<const Expression>(current)};
            std::vector<std::vector<double>> bound(count);
            for (std::size_t s = 0; s < count; ++s) {
                if (active[s]) bound[s] = tape.bind(report.samples[s]);
            }
            kernels::SliceProblem pb{&tape, &bound, state_slots(tape, system), active};
            batch = options.parallel ? kernels::lie_slice_parallel(pb) : kernels::lie_slice_serial(pb);
        }

        std::size_t best = 0;
        for (std::size_t s = 0; s < count; ++s) {
            if (!active[s]) continue;
            if (const auto& f = batch.failures[s]) {
                active[s] = 0;
                report.sample_failures[s] = describe_failure(system, k, f->column, f->error);
                continue;
            }
            append_equilibrated(stacked[s], batch.slices[s]);
            std::size_t r = 0;
            try {
                r = numeric_rank(stacked[s], options.tol);
            } catch (const NonFiniteEntry& e) {
                active[s] = 0;
                report.sample_failures[s] = "order " + std::to_string(k) + ": " + e.what();
                continue;
            }
            auto& ranks = report.rank_by_sample[s];
            // Stacking rows cannot lower the exact rank; guard against rounding.
            if (!ranks.empty()) r = std::max(r, ranks.back());
            ranks.push_back(r);
            best = std::max(best, r);
        }
        if (std::none_of(active.begin(), active.end(), [](char a) { return a != 0; })) {
            std::string msg = "every sample failed to evaluate (try another seed)";
            for (const auto& f : report.sample_failures) {
                if (f) {
                    msg += "; first failure: " + *f;
                    break;
                }
            }
            throw AllSamplesSingular(msg);
        }
        if (!report.rank_by_order.empty()) best = std::max(best, report.rank_by_order.back());
        report.rank_by_order.push_back(best);

        if (best == n || k >= report.order_cap) break;
        if (options.time_budget) {
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            if (elapsed > *options.time_budget) {
                report.budget_exhausted = true;
                break;
            }
        }
    }

    report.final_rank = report.rank_by_order.back();
    report.verdict = report.final_rank == n ? LieVerdict::Observable : LieVerdict::NotObservableUpToOrder;
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace obsgraph
