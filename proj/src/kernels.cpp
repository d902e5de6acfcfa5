#include "obsgraph/kernels.hpp"

#include <omp.h>

namespace obsgraph::kernels {

namespace {

struct Scratch {
    Tape::Workspace ws;
    std::vector<double> tangents;
    std::vector<double> values;
    std::vector<double> derivs;
};

SliceBatch allocate(const SliceProblem& pb) {
    const std::size_t samples = pb.bound->size();
    const std::size_t p = pb.tape->root_count();
    const std::size_t n = pb.state_slot.size();
    SliceBatch out;
    out.slices.resize(samples);
    out.failures.resize(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        if (pb.active[s]) out.slices[s] = Matrix(p, n);
    }
    return out;
}

// Fills column j of sample s. Returns the evaluation error instead of
// throwing so that it can run inside an OpenMP region.
std::optional<EvaluationError> column(const SliceProblem& pb, std::size_t s, std::size_t j, Matrix& slice, Scratch& sc) {
    const auto& slot = pb.state_slot[j];
    if (!slot) return std::nullopt;  // Matrix starts zeroed
    const Tape& tape = *pb.tape;
    const std::size_t p = tape.root_count();
    sc.tangents.assign(tape.symbols().size(), 0.0);
    sc.tangents[*slot] = 1.0;
    sc.values.resize(p);
    sc.derivs.resize(p);
    try {
        tape.run_dual((*pb.bound)[s], sc.tangents, sc.values, sc.derivs, sc.ws);
    } catch (const EvaluationError& e) {
        return e;
    }
    for (std::size_t r = 0; r < p; ++r) slice(r, j) = sc.derivs[r];
    return std::nullopt;
}

} // namespace

SliceBatch lie_slice_serial(const SliceProblem& pb) {
    SliceBatch out = allocate(pb);
    const std::size_t n = pb.state_slot.size();
    Scratch sc;
    for (std::size_t s = 0; s < out.slices.size(); ++s) {
        if (!pb.active[s]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            auto err = column(pb, s, j, out.slices[s], sc);
            if (err && !out.failures[s]) out.failures[s] = SliceFailure{j, std::move(*err)};
        }
    }
    return out;
}

SliceBatch lie_slice_parallel(const SliceProblem& pb) {
    SliceBatch out = allocate(pb);
    const std::size_t n = pb.state_slot.size();
    const auto items = static_cast<std::int64_t>(out.slices.size() * n);
    std::vector<std::optional<EvaluationError>> item_errors(static_cast<std::size_t>(items));

#pragma omp parallel
    {
        Scratch sc;
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t item = 0; item < items; ++item) {
            const auto s = static_cast<std::size_t>(item) / n;
            const auto j = static_cast<std::size_t>(item) % n;
            if (!pb.active[s]) continue;
            item_errors[static_cast<std::size_t>(item)] = column(pb, s, j, out.slices[s], sc);
        }
    }

    // Merge in index order so the reported failure does not depend on the schedule.
    for (std::size_t s = 0; s < out.slices.size(); ++s) {
        for (std::size_t j = 0; j < n; ++j) {
            auto& err = item_errors[s * n + j];
            if (err && !out.failures[s]) out.failures[s] = SliceFailure{j, std::move(*err)};
        }
    }
    return out;
}

} // namespace obsgraph::kernels
