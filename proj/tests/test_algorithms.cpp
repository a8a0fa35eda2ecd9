#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qpq/algorithms.hpp"
#include "qpq/validate.hpp"

using namespace qpq;

namespace {

struct Fixture {
    Dataset data;
    UtilityFunction f;
    explicit Fixture(std::size_t n) : data(make_rank_dataset(n)), f(rank_utility(n)) {}
};

// rng consumption mirror of the unknown-k loop for a guaranteed-null run:
// one index draw and one post-selection draw per pass
std::uint64_t replay_null_iteration_total(std::uint64_t key, std::size_t n) {
    CounterRng rng(key);
    double m = 1.0;
    const double cap = std::sqrt(double(n));
    std::uint64_t total = 0;
    while (m <= cap) {
        total += 1 + rng.uniform_index(std::uint64_t(std::ceil(m)));
        rng.uniform();
        m *= 4.0 / 3.0;
    }
    return total;
}

} // namespace

TEST_CASE("lemma1_probability closed form") {
    CHECK(lemma1_probability(3, 5) == 1.0);
    CHECK(lemma1_probability(10, 3) == doctest::Approx(0.3));
    CHECK(lemma1_probability(1024, 16) == doctest::Approx(16.0 / 1024.0));
    CHECK_THROWS_AS(lemma1_probability(0, 5), std::invalid_argument);
    CHECK_THROWS_AS(lemma1_probability(5, 0), std::invalid_argument);
}

TEST_CASE("min-priority queue orders by (utility, index) and charges log2 k per op") {
    IoLedger led;
    IoPolicy policy;
    MinPriorityQueue q(4, led, policy);
    q.push(7, 30);
    q.push(1, 10);
    q.push(5, 10);
    q.push(2, 20);
    CHECK(q.min() == std::pair<std::size_t, std::uint64_t>{1, 10});
    CHECK(q.pop_min() == std::pair<std::size_t, std::uint64_t>{1, 10});
    CHECK(q.min() == std::pair<std::size_t, std::uint64_t>{5, 10}); // index tie-break
    CHECK(led.pq_ops == doctest::Approx(5 * std::log2(4.0)));
    q.push(0, 1);
    CHECK_THROWS_AS(q.push(9, 2), std::logic_error);
    auto items = q.drain_sorted_desc();
    REQUIRE(items.size() == 4);
    CHECK(items[0].second == 30);
    CHECK(items[3].second == 1);

    IoLedger led1;
    MinPriorityQueue q1(1, led1, policy);
    q1.push(0, 5);
    q1.pop_min();
    CHECK(led1.pq_ops == 0.0); // log2(1) = 0
}

TEST_CASE("qqpq_theta with no qualifying tuple: null, cost equals the drawn schedule") {
    Fixture fx(64);
    Qram qram(fx.data);
    const std::uint64_t key = CounterRng::derive(900, 1);
    CounterRng rng(key);
    QpqParams params;
    params.policy = IoPolicy::theorem_view();
    auto out = qqpq_theta(qram, fx.f, 1000, rng, params);
    CHECK(out.kind == QueryOutcome::Kind::null_result);
    CHECK_FALSE(out.success());
    CHECK(out.ledger.quantum_reads == replay_null_iteration_total(key, 64));
    CHECK(out.passes == 8); // passes of the 4/3 schedule up to sqrt(64)
}

TEST_CASE("qqpq_theta at N=4, k=1 succeeds in exactly one pass") {
    Fixture fx(4);
    Qram qram(fx.data);
    CounterRng rng(1);
    QpqParams params;
    SUBCASE("default policy counts the post-selection read") {
        auto out = qqpq_theta(qram, fx.f, 3, rng, params);
        REQUIRE(out.kind == QueryOutcome::Kind::quantum);
        CHECK(out.passes == 1);
        CHECK(out.ledger.quantum_reads == 2); // one iteration + one post-selection
        CHECK(out.handle->size() == 1);
        CHECK(out.handle->indices()[0] == 3);
    }
    SUBCASE("iteration-only view") {
        params.policy = IoPolicy::theorem_view();
        auto out = qqpq_theta(qram, fx.f, 3, rng, params);
        REQUIRE(out.kind == QueryOutcome::Kind::quantum);
        CHECK(out.ledger.quantum_reads == 1);
    }
}

TEST_CASE("qqpq_theta on an empty active set returns null at zero cost") {
    Fixture fx(8);
    Qram qram(fx.data);
    ActiveSet active(8);
    for (std::size_t i = 0; i < 8; ++i) active.remove(i);
    GoodSpec spec{&fx.f, 0, nullptr, nullptr};
    CounterRng rng(3);
    auto out = qqpq_theta_scoped(qram, spec, active, rng, QpqParams{});
    CHECK(out.kind == QueryOutcome::Kind::null_result);
    CHECK(out.ledger.quantum_reads == 0);
    CHECK(out.passes == 0);
}

TEST_CASE("quantum read accounting is auditable by policy replay") {
    Fixture fx(256);
    Qram qrams[3]{Qram(fx.data), Qram(fx.data), Qram(fx.data)};
    QpqParams with_ps, without_ps, double_read;
    with_ps.policy = IoPolicy::defaults();
    without_ps.policy = IoPolicy::theorem_view();
    double_read.policy = IoPolicy::theorem_view();
    double_read.policy.grover_reads_per_iteration = 2;

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CounterRng r1(seed), r2(seed), r3(seed);
        auto a = qqpq_theta(qrams[0], fx.f, 240, r1, with_ps);
        auto b = qqpq_theta(qrams[1], fx.f, 240, r2, without_ps);
        auto c = qqpq_theta(qrams[2], fx.f, 240, r3, double_read);
        CHECK(a.passes == b.passes);
        // default = iterations + one read per post-selection attempt
        CHECK(a.ledger.quantum_reads == b.ledger.quantum_reads + a.passes);
        // doubling the per-iteration charge exactly doubles the iteration part
        CHECK(c.ledger.quantum_reads == 2 * b.ledger.quantum_reads);
    }
}

TEST_CASE("cqpq_theta above the maximum utility returns an empty classical list") {
    Fixture fx(32);
    Qram qram(fx.data);
    CounterRng rng(7);
    auto out = cqpq_theta(qram, fx.f, 1 << 10, rng, QpqParams{});
    CHECK(out.kind == QueryOutcome::Kind::classical);
    CHECK(out.items.empty());
    CHECK(out.success());
    CHECK(qram.dummy_count() == 0);
}

TEST_CASE("cqpq_theta finds exactly the qualifying set (200 trials, r=3)") {
    Fixture fx(16);
    Qram qram(fx.data);
    const std::uint64_t theta = 13; // 3rd highest of 0..15
    int exact = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng(0xc1u, trial);
        auto out = cqpq_theta(qram, fx.f, theta, rng, QpqParams{});
        std::set<std::size_t> got;
        for (auto& [idx, util] : out.items) got.insert(idx);
        exact += got == std::set<std::size_t>{13, 14, 15} ? 1 : 0;
        CHECK(qram.dummy_count() == 0); // rollback after every query
    }
    CHECK(exact >= trials * 99 / 100);
}

TEST_CASE("cqpq_theta rolls back only its own dummy marks") {
    Fixture fx(16);
    Qram qram(fx.data);
    qram.store_dummy(2); // caller-owned mark
    CounterRng rng(8);
    auto out = cqpq_theta(qram, fx.f, 14, rng, QpqParams{});
    CHECK(out.items.size() == 2);
    CHECK(qram.dummy_count() == 1);
    CHECK(qram.is_dummy(2));
}

TEST_CASE("cqpq_k input validation and the k=N corner") {
    Fixture fx(8);
    Qram qram(fx.data);
    CounterRng rng(5);
    CHECK_THROWS_AS(cqpq_k(qram, fx.f, 0, rng, QpqParams{}), std::invalid_argument);
    CHECK_THROWS_AS(cqpq_k(qram, fx.f, 9, rng, QpqParams{}), std::invalid_argument);
    auto out = cqpq_k(qram, fx.f, 8, rng, QpqParams{});
    REQUIRE(out.items.size() == 8);
    // every index present, ordered best-first
    for (std::size_t r = 0; r < 8; ++r) CHECK(out.items[r].second == 7 - r);
    CHECK(out.ledger.quantum_reads == 0); // D' empties out: nulls are immediate
    CHECK(out.ledger.pq_ops > 0.0);
}

TEST_CASE("cqpq_k matches the sort oracle on random data (200 trials)") {
    Dataset data = generate_synthetic(Category::inde, 256, 4, 99);
    const int trials = 200;
    int exact = 0;
    for (int trial = 0; trial < trials; ++trial) {
        UtilityFunction f = random_query(4, CounterRng::derive(0x6f72u, trial));
        // oracle: full sort by (utility desc, index asc)
        std::vector<std::size_t> order(256);
        std::iota(order.begin(), order.end(), 0);
        std::vector<std::uint64_t> utils(256);
        for (std::size_t i = 0; i < 256; ++i) utils[i] = f(data.tuple(i));
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return utils[a] != utils[b] ? utils[a] > utils[b] : a < b;
        });
        std::set<std::size_t> want(order.begin(), order.begin() + 8);

        Qram qram(data);
        CounterRng rng(0x6b38u, trial);
        auto out = cqpq_k(qram, f, 8, rng, QpqParams{});
        std::set<std::size_t> got;
        for (auto& [idx, util] : out.items) got.insert(idx);
        exact += got == want ? 1 : 0;
    }
    CHECK(exact >= trials * 99 / 100);
}

TEST_CASE("qqpq_k: top-1 handle is the argmax") {
    Fixture fx(32);
    Qram qram(fx.data);
    CounterRng rng(4);
    auto out = qqpq_k(qram, fx.f, 1, rng, QpqParams{});
    REQUIRE(out.kind == QueryOutcome::Kind::quantum);
    REQUIRE(out.handle->size() == 1);
    CHECK(out.handle->indices()[0] == 31);
}

TEST_CASE("qqpq_k: the handle is uniform over the true top-4") {
    Fixture fx(64);
    Qram qram(fx.data);
    CounterRng rng(12);
    auto out = qqpq_k(qram, fx.f, 4, rng, QpqParams{});
    REQUIRE(out.kind == QueryOutcome::Kind::quantum);
    REQUIRE(out.handle->size() == 4);
    std::map<std::size_t, int> counts;
    const int shots = 10000;
    for (int s = 0; s < shots; ++s) ++counts[out.handle->sample(rng).first];
    for (std::size_t idx : {60, 61, 62, 63}) {
        CHECK(counts.count(idx) == 1);
        CHECK(std::abs(counts[idx] / double(shots) - 0.25) <= 0.02);
    }
    CHECK(qram.dummy_count() == 0);
}

TEST_CASE("boyer loop false-negative rate stays under 1/4") {
    Fixture fx(1024);
    Qram qram(fx.data);
    const int trials = 10000;
    for (std::size_t k : {std::size_t(1), std::size_t(4), std::size_t(16)}) {
        int nulls = 0;
        for (int trial = 0; trial < trials; ++trial) {
            CounterRng rng(0xb0u + k, trial);
            auto out = qqpq_theta(qram, fx.f, 1024 - k, rng, QpqParams{});
            nulls += out.kind == QueryOutcome::Kind::null_result ? 1 : 0;
        }
        const double rate = nulls / double(trials);
        INFO("k=", k, " null rate ", rate);
        CHECK(rate <= 0.25 + 0.013); // 3 sigma over the binomial at p=1/4
    }
}

TEST_CASE("mean quantum IOs decrease as the good set grows") {
    const std::size_t n = 1 << 16;
    Fixture fx(n);
    Qram qram(fx.data);
    QpqParams params;
    params.policy = IoPolicy::theorem_view();
    double previous = 1e300;
    for (std::size_t k : {std::size_t(1), std::size_t(4), std::size_t(16), std::size_t(64),
                          std::size_t(256)}) {
        double sum = 0.0;
        const int trials = 300;
        for (int trial = 0; trial < trials; ++trial) {
            CounterRng rng(0x304du + k, trial);
            auto out = qqpq_theta(qram, fx.f, n - k, rng, params);
            sum += double(out.ledger.quantum_reads);
        }
        const double mean = sum / trials;
        INFO("k=", k, " mean ", mean);
        CHECK(mean < previous);
        previous = mean;
    }
}

TEST_CASE("a small theorem-1 configuration stays under the bound") {
    Fixture fx(1024);
    Qram qram(fx.data);
    QpqParams params;
    params.policy = IoPolicy::theorem_view();
    double sum = 0.0;
    const int trials = 500;
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng(0x743174u, trial);
        auto out = qqpq_theta(qram, fx.f, 1023, rng, params);
        sum += double(out.ledger.quantum_reads);
    }
    CHECK(sum / trials <= 144.0); // 4.5 sqrt(1024/1)
    CHECK(sum / trials > 0.0);
}

TEST_CASE("lemma1 and bounds validation suites") {
    for (const auto& r : validate_lemma1(4000)) {
        INFO(r.name, ": ", r.detail);
        CHECK(r.passed);
    }
}

TEST_CASE("cqpq_theta mean IOs stay under 9 sqrt(Nk) at N=1024, k=4") {
    Fixture fx(1024);
    Qram qram(fx.data);
    QpqParams params;
    params.policy = IoPolicy::theorem_view();
    double sum = 0.0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng(0x743262u, trial);
        auto out = cqpq_theta(qram, fx.f, 1020, rng, params);
        sum += double(out.ledger.quantum_reads);
    }
    CHECK(sum / trials <= 9.0 * std::sqrt(1024.0 * 4.0));
}

TEST_CASE("collapsed amplitudes are the closed form itself") {
    Fixture fx(100);
    Qram qram(fx.data);
    ActiveSet active(100);
    CounterRng unused(0);
    for (std::size_t k : {std::size_t(1), std::size_t(37), std::size_t(100)}) {
        GoodSpec spec{&fx.f, 100 - k, nullptr, nullptr};
        EngineState st(Backend::collapsed, qram, spec, active);
        const double t = std::asin(std::sqrt(double(k) / 100.0));
        for (std::size_t s = 0; s <= 60; ++s) {
            if (s > 0) st.grover_iterate(qram, IoPolicy{});
            CHECK(st.good_amplitude() == std::sin(double(2 * s + 1) * t));
        }
    }
}

TEST_CASE("qqpq_k total cost stays in the sqrt(Nk) regime") {
    Dataset data = generate_synthetic(Category::inde, 1024, 4, 0x71716bu);
    QpqParams params;
    params.policy = IoPolicy::theorem_view();
    double sum = 0.0;
    const int trials = 100;
    int quantum = 0;
    for (int trial = 0; trial < trials; ++trial) {
        UtilityFunction f = random_query(4, CounterRng::derive(0x71717175u, trial));
        Qram qram(data);
        CounterRng rng(0x71717472u, trial);
        auto out = qqpq_k(qram, f, 10, rng, params);
        quantum += out.kind == QueryOutcome::Kind::quantum ? 1 : 0;
        sum += double(out.ledger.quantum_reads) + out.ledger.pq_ops;
    }
    // the top-k learning phase bound plus a final threshold run per retry
    const double limit = bound(Theorem::t3, 1024, 10) + 3.0 * bound(Theorem::t1, 1024, 10);
    CHECK(sum / trials <= limit);
    CHECK(quantum >= trials * 95 / 100);
}

TEST_CASE("classical outputs hold distinct indices with utilities consistent with f") {
    Dataset data = generate_synthetic(Category::corr, 512, 3, 42);
    UtilityFunction f = random_query(3, 7);
    Qram qram(data);
    CounterRng rng(21);
    auto check_items = [&](const QueryOutcome& out) {
        std::set<std::size_t> seen;
        for (auto& [idx, util] : out.items) {
            CHECK(seen.insert(idx).second);
            CHECK(util == f(data.tuple(idx)));
        }
    };
    std::vector<std::uint64_t> utils(512);
    for (std::size_t i = 0; i < 512; ++i) utils[i] = f(data.tuple(i));
    std::nth_element(utils.begin(), utils.begin() + 19, utils.end(), std::greater<>());
    check_items(cqpq_theta(qram, f, utils[19], rng, QpqParams{}));
    check_items(cqpq_k(qram, f, 20, rng, QpqParams{}));
}

TEST_CASE("cqpq_theta runs end to end on the gate backend") {
    Fixture fx(8); // 8 tuples, 3-bit attributes: 3 + 3 + 3 + 1 qubits
    Qram qram(fx.data);
    QpqParams params;
    params.backend = Backend::gate;
    int exact = 0;
    for (int trial = 0; trial < 25; ++trial) {
        CounterRng rng(0x67636cu, trial);
        auto out = cqpq_theta(qram, fx.f, 6, rng, params);
        std::set<std::size_t> got;
        for (auto& [idx, util] : out.items) got.insert(idx);
        exact += got == std::set<std::size_t>{6, 7} ? 1 : 0;
        CHECK(qram.dummy_count() == 0);
    }
    CHECK(exact == 25);
}
