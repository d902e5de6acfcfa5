#include "obsgraph/catalog.hpp"
#include "obsgraph/kernels.hpp"
#include "obsgraph/lie.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace obsgraph;

namespace {

struct Fixture {
    Tape tape;
    std::vector<std::vector<double>> bound;
    kernels::SliceProblem problem;
};

std::unique_ptr<Fixture> order_problem(const DynSystem& s, std::size_t order, std::size_t samples, std::uint64_t seed) {
    std::vector<Expression> roots;
    for (std::size_t r = 0; r < s.outputs.size(); ++r) roots.push_back(lie_chain(s, r, order).terms.back());
    auto f = std::unique_ptr<Fixture>(new Fixture{Tape{std::span<const Expression>(roots)}, {}, {}});
    for (const auto& env : draw_samples(s, samples, seed)) f->bound.push_back(f->tape.bind(env));
    f->problem.tape = &f->tape;
    f->problem.bound = &f->bound;
    for (const auto& x : s.states) f->problem.state_slot.push_back(f->tape.find_symbol(NodeKind::State, x));
    f->problem.active.assign(samples, 1);
    return f;
}

bool bit_identical(const kernels::SliceBatch& a, const kernels::SliceBatch& b) {
    if (a.slices.size() != b.slices.size() || a.failures.size() != b.failures.size()) return false;
    for (std::size_t s = 0; s < a.slices.size(); ++s) {
        const auto& x = a.slices[s];
        const auto& y = b.slices[s];
        if (x.rows != y.rows || x.cols != y.cols) return false;
        if (!x.data.empty() && std::memcmp(x.data.data(), y.data.data(), x.data.size() * sizeof(double)) != 0) return false;
        if (a.failures[s].has_value() != b.failures[s].has_value()) return false;
        if (a.failures[s] && (a.failures[s]->column != b.failures[s]->column ||
                              std::string(a.failures[s]->error.what()) != b.failures[s]->error.what())) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("serial and parallel slices are bit-identical on the catalog models") {
    for (const char* key : {"example1_y1", "example1_y2", "wscc_decentralized"}) {
        CAPTURE(key);
        auto s = get_model(key);
        for (std::size_t order = 0; order < 4; ++order) {
            auto f = order_problem(s, order, 16, 42 + order);
            CHECK(bit_identical(kernels::lie_slice_serial(f->problem), kernels::lie_slice_parallel(f->problem)));
        }
    }
}

TEST_CASE("serial and parallel slices are bit-identical on random systems") {
    std::mt19937_64 rng(83);
    for (int i = 0; i < 40; ++i) {
        std::size_t n = 1 + rng() % 6;
        auto s = oracle::random_system(rng, n, 0.5, {0, n - 1});
        auto f = order_problem(s, rng() % 3, 9, rng());
        if (i % 3 == 0) f->problem.active[4] = 0;
        auto a = kernels::lie_slice_serial(f->problem);
        auto b = kernels::lie_slice_parallel(f->problem);
        CHECK(bit_identical(a, b));
        if (i % 3 == 0) CHECK(a.slices[4].data.empty());
    }
}

TEST_CASE("failures are reported at the lowest failing column in both kernels") {
    auto s = get_model("example1_y1");
    DynSystem t = s;
    t.outputs[0].rhs = Expression::constant(1) / (Expression::state("x2") * Expression::state("x3"));
    auto f = order_problem(t, 0, 3, 1);
    // Sample 1 places x2 at zero: the value itself divides by zero.
    f->bound[1][*f->problem.state_slot[1]] = 0.0;
    auto a = kernels::lie_slice_serial(f->problem);
    auto b = kernels::lie_slice_parallel(f->problem);
    CHECK(bit_identical(a, b));
    REQUIRE(a.failures[1].has_value());
    // x1 does not occur, so its column is never swept; x2 is the first evaluated.
    CHECK(a.failures[1]->column == 1);
    CHECK_FALSE(a.failures[0].has_value());
    CHECK_FALSE(a.failures[2].has_value());
}

TEST_CASE("missing state columns are zero") {
    auto s = get_model("example1_y3");
    auto f = order_problem(s, 2, 4, 9);
    auto batch = kernels::lie_slice_parallel(f->problem);
    for (const auto& m : batch.slices) {
        CHECK(m(0, 0) == 0.0);
        CHECK(m(0, 1) == 0.0);
        CHECK(m(0, 2) == 0.0);
        CHECK(m(0, 3) == 1.0);
    }
}

}
