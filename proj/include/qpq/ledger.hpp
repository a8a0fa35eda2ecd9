#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace qpq {

/**
 * IO counters in the cost model used throughout: one quantum QRAM read, one
 * classical page access, or one priority-queue operation charge. Counters only
 * grow during a run; merging ledgers is component-wise addition.
 */
struct IoLedger {
    std::uint64_t quantum_reads = 0;
    std::uint64_t classical_reads = 0;
    std::uint64_t classical_writes = 0;
    double pq_ops = 0.0;

    std::uint64_t classical_total() const { return classical_reads + classical_writes; }
    double total() const {
        return double(quantum_reads) + double(classical_reads) + double(classical_writes) + pq_ops;
    }

    IoLedger& operator+=(const IoLedger& o) {
        quantum_reads += o.quantum_reads;
        classical_reads += o.classical_reads;
        classical_writes += o.classical_writes;
        pq_ops += o.pq_ops;
        return *this;
    }
    friend IoLedger operator+(IoLedger a, const IoLedger& b) { return a += b; }
    bool operator==(const IoLedger&) const = default;
};

/// end - start, for snapshotting the cost of one query on a shared ledger.
inline IoLedger ledger_delta(const IoLedger& end, const IoLedger& start) {
    IoLedger d;
    d.quantum_reads = end.quantum_reads - start.quantum_reads;
    d.classical_reads = end.classical_reads - start.classical_reads;
    d.classical_writes = end.classical_writes - start.classical_writes;
    d.pq_ops = end.pq_ops - start.pq_ops;
    return d;
}

enum class LoadContext { grover_iteration, post_selection };
enum class Access { read, write };

/**
 * Counting policy. The defaults (one read per Grover iteration, the
 * post-selection read counted, log2(k) per queue operation, one tuple per
 * page) reproduce the accounting behind the closed-form bounds; theorem_view()
 * drops the post-selection read because the bound proofs count iterations only.
 */
struct IoPolicy {
    unsigned grover_reads_per_iteration = 1; // 2 also counts the uncompute pass
    bool count_postselect_read = true;
    std::uint64_t tuples_per_page = 1;
    std::function<double(std::size_t)> pq_op_cost = [](std::size_t k) {
        return k > 1 ? std::log2(double(k)) : 0.0;
    };

    static IoPolicy defaults() { return {}; }
    static IoPolicy theorem_view() {
        IoPolicy p;
        p.count_postselect_read = false;
        return p;
    }
};

inline void record_quantum_load(IoLedger& ledger, const IoPolicy& policy, LoadContext context) {
    if (policy.grover_reads_per_iteration < 1 || policy.grover_reads_per_iteration > 2)
        throw std::invalid_argument("grover_reads_per_iteration must be 1 or 2");
    switch (context) {
    case LoadContext::grover_iteration:
        ledger.quantum_reads += policy.grover_reads_per_iteration;
        break;
    case LoadContext::post_selection:
        if (policy.count_postselect_read) ledger.quantum_reads += 1;
        break;
    }
}

inline void record_classical_access(IoLedger& ledger, Access kind, std::uint64_t count,
                                    const IoPolicy& policy = {}) {
    if (policy.tuples_per_page == 0) throw std::invalid_argument("tuples_per_page must be >= 1");
    std::uint64_t pages = (count + policy.tuples_per_page - 1) / policy.tuples_per_page;
    (kind == Access::read ? ledger.classical_reads : ledger.classical_writes) += pages;
}

} // namespace qpq
