#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "qpq/dataset.hpp"
#include "qpq/ledger.hpp"

namespace qpq {

/// Subset of tuple indices still participating in a search.
class ActiveSet {
public:
    explicit ActiveSet(std::size_t universe) : in_(universe, 1), count_(universe) {}

    std::size_t universe() const { return in_.size(); }
    std::size_t size() const { return count_; }
    bool contains(std::size_t i) const { return in_[i] != 0; }

    void remove(std::size_t i) {
        if (i >= in_.size()) throw std::out_of_range("ActiveSet::remove");
        if (in_[i]) {
            in_[i] = 0;
            --count_;
        }
    }

    void restore_all() {
        std::fill(in_.begin(), in_.end(), std::uint8_t(1));
        count_ = in_.size();
    }

    template <class F>
    void for_each(F&& fn) const {
        for (std::size_t i = 0; i < in_.size(); ++i)
            if (in_[i]) fn(i);
    }

private:
    std::vector<std::uint8_t> in_;
    std::size_t count_;
};

/**
 * Idealized classical-write quantum-read memory holding one dataset. Cells can
 * be overwritten or marked dummy; a dummy cell scores the minimum utility (0)
 * under every utility function, which is how answered tuples are retired from
 * the good set without shrinking the address space.
 *
 * Data access and IO accounting are deliberately decoupled: load() moves no
 * counters, all charging goes through the record_* operations so that every
 * counted IO is an auditable, policy-driven event. Each Qram owns the IoLedger
 * for its worker; ledgers from parallel workers merge by addition.
 */
class Qram {
public:
    explicit Qram(const Dataset& data) : data_(&data), dummy_(data.size(), 0) {}

    std::size_t size() const { return data_->size(); }
    const Dataset& dataset() const { return *data_; }

    IoLedger& ledger() { return ledger_; }
    const IoLedger& ledger() const { return ledger_; }

    /// Overwrite a cell with a tuple value. One classical write.
    void store(std::size_t addr, Tuple value, const IoPolicy& policy = {}) {
        check_addr(addr);
        if (value.attrs.size() != data_->dims())
            throw std::invalid_argument("qram store: dimension mismatch");
        for (std::uint32_t a : value.attrs)
            if (a >= data_->attr_limit())
                throw std::invalid_argument("qram store: attribute exceeds attr_bits range");
        overrides_[addr] = std::move(value);
        has_overrides_ = true;
        if (dummy_[addr]) {
            dummy_[addr] = 0;
            --dummy_count_;
        }
        qpq::record_classical_access(ledger_, Access::write, 1, policy);
    }

    /// Mark a cell dummy. One classical write.
    void store_dummy(std::size_t addr, const IoPolicy& policy = {}) {
        check_addr(addr);
        if (!dummy_[addr]) {
            dummy_[addr] = 1;
            ++dummy_count_;
        }
        qpq::record_classical_access(ledger_, Access::write, 1, policy);
    }

    /// Clear a dummy mark. Bookkeeping rollback, not an algorithm step: uncharged.
    void restore(std::size_t addr) {
        check_addr(addr);
        if (dummy_[addr]) {
            dummy_[addr] = 0;
            --dummy_count_;
        }
    }

    std::span<const std::uint32_t> load(std::size_t addr) const {
        check_addr(addr);
        if (has_overrides_) {
            auto it = overrides_.find(addr);
            if (it != overrides_.end()) return it->second.attrs;
        }
        return data_->tuple(addr);
    }

    bool is_dummy(std::size_t addr) const { return dummy_[addr] != 0; }
    std::size_t dummy_count() const { return dummy_count_; }

    /// Dummy-aware utility of a cell: dummies sit at the global minimum.
    std::uint64_t utility(const UtilityFunction& f, std::size_t addr) const {
        return is_dummy(addr) ? 0 : f(load(addr));
    }

    void record_quantum_load(const IoPolicy& policy, LoadContext context) {
        qpq::record_quantum_load(ledger_, policy, context);
    }
    void record_classical_access(Access kind, std::uint64_t count, const IoPolicy& policy = {}) {
        qpq::record_classical_access(ledger_, kind, count, policy);
    }

private:
    void check_addr(std::size_t addr) const {
        if (addr >= data_->size()) throw std::out_of_range("qram: addr out of range");
    }

    const Dataset* data_;
    std::vector<std::uint8_t> dummy_;
    std::size_t dummy_count_ = 0;
    std::unordered_map<std::size_t, Tuple> overrides_;
    bool has_overrides_ = false;
    IoLedger ledger_;
};

/// Raw utilities of every cell under f, ignoring dummy marks (those are
/// re-checked at use). Classical bookkeeping for the simulator; uncharged.
inline std::vector<std::uint64_t> evaluate_all(const Qram& qram, const UtilityFunction& f) {
    std::vector<std::uint64_t> out(qram.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(qram.load(i));
    return out;
}

} // namespace qpq
