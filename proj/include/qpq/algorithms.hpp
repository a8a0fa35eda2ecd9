#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qpq/engine.hpp"
#include "qpq/ledger.hpp"
#include "qpq/qram.hpp"
#include "qpq/rng.hpp"

namespace qpq {

struct QpqParams {
    Backend backend = Backend::collapsed;
    IoPolicy policy = {};
    int retries = 3; // consecutive nulls accepted before a loop terminates
};

/// Result of one query: a classical list, a quantum handle, or null when the
/// termination rule fired, plus the IO spent and the amplification pass count.
struct QueryOutcome {
    enum class Kind { classical, quantum, null_result };

    Kind kind = Kind::null_result;
    std::vector<std::pair<std::size_t, std::uint64_t>> items; // classical output
    std::optional<SuperpositionHandle> handle;                // quantum output
    IoLedger ledger;                                          // cost of this query
    std::size_t passes = 0;                                   // Boyer passes executed

    bool success() const { return kind != Kind::null_result; }
};

/**
 * Bounded min-priority queue keyed by (utility, index), charging the ledger
 * pq_op_cost(capacity) per push or pop.
 */
class MinPriorityQueue {
public:
    MinPriorityQueue(std::size_t capacity, IoLedger& ledger, const IoPolicy& policy)
        : capacity_(capacity), ledger_(&ledger), charge_(policy.pq_op_cost(capacity)) {
        if (capacity_ == 0) throw std::invalid_argument("priority queue: capacity must be >= 1");
        heap_.reserve(capacity_);
    }

    std::size_t size() const { return heap_.size(); }
    std::size_t capacity() const { return capacity_; }

    void push(std::size_t index, std::uint64_t utility) {
        if (heap_.size() >= capacity_) throw std::logic_error("priority queue: over capacity");
        heap_.push_back({utility, index});
        std::push_heap(heap_.begin(), heap_.end(), cmp);
        ledger_->pq_ops += charge_;
    }

    std::pair<std::size_t, std::uint64_t> min() const {
        if (heap_.empty()) throw std::logic_error("priority queue: empty");
        return {heap_.front().index, heap_.front().utility};
    }

    std::pair<std::size_t, std::uint64_t> pop_min() {
        auto top = min();
        std::pop_heap(heap_.begin(), heap_.end(), cmp);
        heap_.pop_back();
        ledger_->pq_ops += charge_;
        return top;
    }

    /// Contents ordered best-first; bookkeeping handoff, uncharged.
    std::vector<std::pair<std::size_t, std::uint64_t>> drain_sorted_desc() {
        std::sort(heap_.begin(), heap_.end(), [](const Entry& a, const Entry& b) {
            return a.utility != b.utility ? a.utility > b.utility : a.index < b.index;
        });
        std::vector<std::pair<std::size_t, std::uint64_t>> out;
        out.reserve(heap_.size());
        for (const auto& e : heap_) out.emplace_back(e.index, e.utility);
        heap_.clear();
        return out;
    }

private:
    struct Entry {
        std::uint64_t utility;
        std::size_t index;
    };
    // min-heap on (utility, index)
    static bool cmp(const Entry& a, const Entry& b) {
        return a.utility != b.utility ? a.utility > b.utility : a.index > b.index;
    }

    std::size_t capacity_;
    IoLedger* ledger_;
    double charge_;
    std::vector<Entry> heap_;
};

/**
 * Quantum-output threshold query over an explicit scope: the unknown-k loop
 * with schedule m <- m * 4/3 while m <= sqrt(|active|), a uniformly drawn
 * iteration count j in {1..ceil(m)} per pass, and one post-selection per pass.
 * Returns the handle on the first successful post-selection, null once the
 * schedule is exhausted (false-negative rate at most 1/4 when good tuples
 * exist) or immediately when the active set is empty.
 */
inline QueryOutcome qqpq_theta_scoped(Qram& qram, const GoodSpec& spec, const ActiveSet& active,
                                      CounterRng& rng, const QpqParams& params = {}) {
    QueryOutcome out;
    const IoLedger start = qram.ledger();
    if (active.size() == 0) {
        out.kind = QueryOutcome::Kind::null_result;
        return out;
    }
    ClassView view = ClassView::survey(qram, active, spec);
    const double cap = std::sqrt(double(active.size()));
    double m = 1.0;
    while (m <= cap) {
        const std::uint64_t limit = std::uint64_t(std::ceil(m));
        const std::uint64_t j = 1 + rng.uniform_index(limit);
        EngineState state(params.backend, qram, spec, active, &view);
        for (std::uint64_t s = 0; s < j; ++s) state.grover_iterate(qram, params.policy);
        ++out.passes;
        if (auto handle = state.post_select(qram, params.policy, rng)) {
            out.kind = QueryOutcome::Kind::quantum;
            out.handle = std::move(handle);
            out.ledger = ledger_delta(qram.ledger(), start);
            return out;
        }
        m *= 4.0 / 3.0;
    }
    out.kind = QueryOutcome::Kind::null_result;
    out.ledger = ledger_delta(qram.ledger(), start);
    return out;
}

inline QueryOutcome qqpq_theta(Qram& qram, const UtilityFunction& f, std::uint64_t theta,
                               CounterRng& rng, const QpqParams& params = {}) {
    GoodSpec spec{&f, theta, nullptr, nullptr};
    ActiveSet active(qram.size());
    return qqpq_theta_scoped(qram, spec, active, rng, params);
}

/**
 * Classical-output threshold query: repeatedly run the quantum query, measure
 * one index out of each returned handle and retire it via a dummy mark, until
 * `retries` consecutive nulls are accepted. The marks are rolled back before
 * returning so the memory is reusable.
 */
inline QueryOutcome cqpq_theta(Qram& qram, const UtilityFunction& f, std::uint64_t theta,
                               CounterRng& rng, const QpqParams& params = {}) {
    QueryOutcome out;
    const IoLedger start = qram.ledger();
    const std::vector<std::uint64_t> utils = evaluate_all(qram, f);
    GoodSpec spec{&f, theta, &utils, nullptr};
    ActiveSet active(qram.size());
    std::vector<std::size_t> marked;

    int nulls = 0;
    while (nulls < params.retries) {
        QueryOutcome round = qqpq_theta_scoped(qram, spec, active, rng, params);
        out.passes += round.passes;
        if (round.kind == QueryOutcome::Kind::quantum) {
            auto [idx, util] = round.handle->measure(rng);
            qram.store_dummy(idx, params.policy);
            marked.push_back(idx);
            out.items.emplace_back(idx, util);
            nulls = 0;
        } else {
            ++nulls;
        }
    }
    for (std::size_t idx : marked) qram.restore(idx);
    out.kind = QueryOutcome::Kind::classical;
    out.ledger = ledger_delta(qram.ledger(), start);
    return out;
}

/**
 * Classical-output top-k query. A min-priority queue seeded with k random
 * tuples (removed from the search scope) tracks the best k seen; each round
 * runs the threshold query at the queue minimum, measures one better tuple,
 * removes it from the scope and rotates it into the queue. Terminates after
 * `retries` consecutive nulls; the queue then holds the top-k.
 *
 * insertion_log, when given, records every index pushed into the queue,
 * seeding included.
 */
inline QueryOutcome cqpq_k(Qram& qram, const UtilityFunction& f, std::size_t k, CounterRng& rng,
                           const QpqParams& params = {},
                           std::vector<std::size_t>* insertion_log = nullptr) {
    const std::size_t n = qram.size();
    if (k == 0) throw std::invalid_argument("cqpq_k: k must be >= 1");
    if (k > n) throw std::invalid_argument("cqpq_k: k exceeds dataset size");

    QueryOutcome out;
    const IoLedger start = qram.ledger();
    const std::vector<std::uint64_t> utils = evaluate_all(qram, f);
    GoodSpec spec{&f, 0, &utils, nullptr};
    ActiveSet active(n);
    MinPriorityQueue queue(k, qram.ledger(), params.policy);

    std::size_t seeded = 0;
    while (seeded < k) {
        std::size_t pick = std::size_t(rng.uniform_index(n));
        if (!active.contains(pick)) continue;
        active.remove(pick);
        queue.push(pick, spec.utility(qram, pick));
        if (insertion_log) insertion_log->push_back(pick);
        ++seeded;
    }

    int nulls = 0;
    while (nulls < params.retries) {
        spec.theta = queue.min().second;
        QueryOutcome round = qqpq_theta_scoped(qram, spec, active, rng, params);
        out.passes += round.passes;
        if (round.kind == QueryOutcome::Kind::quantum) {
            auto [idx, util] = round.handle->measure(rng);
            active.remove(idx);
            queue.pop_min();
            queue.push(idx, util);
            if (insertion_log) insertion_log->push_back(idx);
            nulls = 0;
        } else {
            ++nulls;
        }
    }
    out.items = queue.drain_sorted_desc();
    out.kind = QueryOutcome::Kind::classical;
    out.ledger = ledger_delta(qram.ledger(), start);
    return out;
}

/**
 * Quantum-output top-k query: learn the k-th highest utility classically with
 * cqpq_k, then rebuild the superposition over exactly those k tuples. The
 * final threshold run restricts the oracle to the learned index list so ties
 * at the cut cannot widen the output beyond k.
 */
inline QueryOutcome qqpq_k(Qram& qram, const UtilityFunction& f, std::size_t k, CounterRng& rng,
                           const QpqParams& params = {}) {
    QueryOutcome out;
    const IoLedger start = qram.ledger();
    QueryOutcome classical = cqpq_k(qram, f, k, rng, params);
    out.passes = classical.passes;

    const std::uint64_t theta_star = classical.items.back().second; // k-th highest utility
    std::vector<std::uint8_t> members(qram.size(), 0);
    for (const auto& [idx, util] : classical.items) members[idx] = 1;

    const std::vector<std::uint64_t> utils = evaluate_all(qram, f);
    GoodSpec spec{&f, theta_star, &utils, &members};
    ActiveSet active(qram.size());
    for (int attempt = 0; attempt < params.retries; ++attempt) {
        QueryOutcome round = qqpq_theta_scoped(qram, spec, active, rng, params);
        out.passes += round.passes;
        if (round.kind == QueryOutcome::Kind::quantum) {
            out.kind = QueryOutcome::Kind::quantum;
            out.handle = std::move(round.handle);
            break;
        }
    }
    out.ledger = ledger_delta(qram.ledger(), start);
    return out;
}

/// Probability that the tuple of a given utility rank (1 = best) ever enters
/// the top-k queue: 1 for the winners, k/rank for the rest.
inline double lemma1_probability(std::size_t rank, std::size_t k) {
    if (rank < 1 || k < 1) throw std::invalid_argument("lemma1_probability: rank out of range");
    return rank <= k ? 1.0 : double(k) / double(rank);
}

} // namespace qpq
