#include "obsgraph/synthetic.hpp"

#include <random>
#include <string>

namespace obsgraph {

DynSystem chain_of_cycles(std::size_t min_edges, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DynSystem s;
    s.name = "chain_of_cycles";
    std::vector<std::vector<std::size_t>> deps;
    std::size_t edges = 0;
    std::size_t prev_first = 0;
    bool first_cycle = true;
    while (edges < min_edges || first_cycle) {
        // Length 3..6 from the top bits; avoids distribution differences across std libraries.
        const std::size_t len = 3 + static_cast<std::size_t>(rng() >> 62);
        const std::size_t base = deps.size();
        for (std::size_t k = 0; k < len; ++k) deps.push_back({base + (k + 1) % len});
        edges += len;
        if (!first_cycle) {
            deps[prev_first].push_back(base);  // previous cycle reads this one
            ++edges;
        }
        prev_first = base;
        first_cycle = false;
    }

    s.states.reserve(deps.size());
    for (std::size_t i = 0; i < deps.size(); ++i) s.states.push_back("s" + std::to_string(i));
    s.derivatives.reserve(deps.size());
    for (const auto& d : deps) {
        DependencySpec spec;
        for (auto j : d) spec.states.push_back(s.states[j]);
        s.derivatives.emplace_back(std::move(spec));
    }
    s.outputs.push_back({"y", DependencySpec{{"s0"}, {}}});
    return s;
}

} // namespace obsgraph
