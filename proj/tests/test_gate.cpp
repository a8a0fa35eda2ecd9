#include <doctest.h>

#include <cmath>

#include "qpq/gate_sim.hpp"
#include "qpq/engine.hpp"
#include "qpq/validate.hpp"

using namespace qpq;

namespace {

Dataset tiny_dataset() {
    // N=8, d=2, 2-bit attributes: the 10-qubit register layout
    return Dataset(2, 2, {0, 1, 1, 2, 2, 3, 3, 0, 1, 3, 2, 1, 0, 2, 3, 3}, {});
}

UtilityFunction tiny_utility() {
    return UtilityFunction::linear_scaled({0.5, 0.5}, 1.0, 2);
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

} // namespace

TEST_CASE("the 8-tuple two-attribute layout uses ten qubits") {
    GateSim sim(3, 2, 2, 2);
    CHECK(sim.qubits() == 10);
    CHECK(sim.states() == 1024);
}

TEST_CASE("qubit budget is enforced") {
    CHECK_THROWS_AS(GateSim(20, 2, 8, 8), std::invalid_argument);
}

TEST_CASE("applying the memory unitary twice restores the attribute registers") {
    Dataset data = tiny_dataset();
    Qram qram(data);
    GateSim sim(3, 2, 2, 2);
    auto active = all_indices(8);
    sim.apply_prep(active);
    sim.apply_qram(qram);
    double loaded_mass = 0.0;
    for (std::size_t b = 0; b < sim.states(); ++b)
        if (sim.attr_field_of(b) != 0) loaded_mass += std::norm(sim.amplitude(b));
    CHECK(loaded_mass > 0.5); // attributes really were loaded
    sim.apply_qram(qram);
    for (std::size_t b = 0; b < sim.states(); ++b)
        if (sim.attr_field_of(b) != 0) CHECK(std::norm(sim.amplitude(b)) == 0.0);
}

TEST_CASE("norm and realness are preserved by every operation") {
    Dataset data = tiny_dataset();
    Qram qram(data);
    UtilityFunction f = tiny_utility();
    GoodSpec spec{&f, 2, nullptr, nullptr};
    GateSim sim(3, 2, 2, 2);
    auto active = all_indices(8);
    sim.apply_prep(active);
    sim.apply_qram(qram);
    sim.apply_utility_oracle(qram, spec);
    sim.apply_phase_oracle(spec, 8);
    sim.apply_qram(qram);
    sim.apply_utility_oracle(qram, spec);
    sim.apply_diffusion(active);
    sim.apply_flip_oracle(spec, 8);
    CHECK(sim.norm_error() < 1e-12);
    CHECK(sim.max_imag() < 1e-12);
}

TEST_CASE("one gate iteration equals the closed-form recurrence") {
    Dataset data = tiny_dataset();
    Qram qram(data);
    UtilityFunction f = tiny_utility();
    for (std::uint64_t theta = 0; theta <= 3; ++theta) {
        GoodSpec spec{&f, theta, nullptr, nullptr};
        ActiveSet active(8);
        EngineState gate(Backend::gate, qram, spec, active);
        const double t = std::asin(std::sqrt(double(gate.good_count()) / 8.0));
        gate.grover_iterate(qram, IoPolicy{});
        CHECK(gate.good_amplitude() == doctest::Approx(std::sin(3.0 * t)).epsilon(1e-12));
    }
}

TEST_CASE("prep over a strict subset is uniform on it and supports amplification") {
    Dataset data = tiny_dataset();
    Qram qram(data);
    UtilityFunction f = tiny_utility();
    GateSim sim(3, 2, 2, 2);
    std::vector<std::size_t> active{1, 5};
    sim.apply_prep(active);
    auto marg = sim.index_marginal();
    CHECK(marg[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(marg[5] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(marg[0] + marg[2] + marg[3] + marg[4] + marg[6] + marg[7] ==
          doctest::Approx(0.0).epsilon(1e-12));

    // restricted two-element search with one good member: engine path
    ActiveSet subset(8);
    for (std::size_t i : {0u, 2u, 3u, 4u, 6u, 7u}) subset.remove(i);
    std::vector<std::uint8_t> members(8, 0);
    members[5] = 1;
    GoodSpec restricted{&f, 0, nullptr, &members};
    EngineState st(Backend::gate, qram, restricted, subset);
    CHECK(st.good_count() == 1);
    st.grover_iterate(qram, IoPolicy{});
    const double t = std::asin(std::sqrt(0.5));
    CHECK(st.good_amplitude() == doctest::Approx(std::sin(3.0 * t)).epsilon(1e-12));
}

TEST_CASE("measuring the aux qubit collapses to the right conditional state") {
    Dataset data = tiny_dataset();
    Qram qram(data);
    UtilityFunction f = tiny_utility();
    GoodSpec spec{&f, 2, nullptr, nullptr};
    ActiveSet active(8);
    EngineState st(Backend::gate, qram, spec, active);
    auto [p, cond] = st.postselect_analysis();
    CounterRng rng(2024);
    auto handle = st.post_select(qram, IoPolicy{}, rng);
    if (handle) {
        CHECK(handle->size() == st.good_count());
        auto dist = st.index_distribution();
        for (std::size_t i = 0; i < dist.size(); ++i)
            CHECK(dist[i] == doctest::Approx(cond[i]).epsilon(1e-9));
    }
}

TEST_CASE("dummy marks flow through the gate oracles") {
    Dataset data = tiny_dataset();
    Qram qram(data);
    UtilityFunction f = tiny_utility();
    GoodSpec spec{&f, 1, nullptr, nullptr};
    ActiveSet active(8);
    EngineState before(Backend::gate, qram, spec, active);
    const std::size_t k_before = before.good_count();
    // retire one good tuple; the gate circuit must score it at zero
    std::size_t victim = 99;
    for (std::size_t i = 0; i < 8 && victim == 99; ++i)
        if (spec.is_good(qram, i)) victim = i;
    REQUIRE(victim != 99);
    qram.store_dummy(victim);
    EngineState after(Backend::gate, qram, spec, active);
    CHECK(after.good_count() == k_before - 1);
    const double t = std::asin(std::sqrt(double(k_before - 1) / 8.0));
    after.grover_iterate(qram, IoPolicy{});
    CHECK(after.good_amplitude() == doctest::Approx(std::sin(3.0 * t)).epsilon(1e-12));
}
