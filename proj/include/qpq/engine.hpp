#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpq/gate_sim.hpp"
#include "qpq/ledger.hpp"
#include "qpq/qram.hpp"
#include "qpq/rng.hpp"

namespace qpq {

enum class Backend { collapsed, dense, gate };

inline const char* to_string(Backend b) {
    switch (b) {
    case Backend::collapsed: return "collapsed";
    case Backend::dense: return "dense";
    case Backend::gate: return "gate";
    }
    return "?";
}

inline Backend backend_from_string(const std::string& s) {
    if (s == "collapsed") return Backend::collapsed;
    if (s == "dense") return Backend::dense;
    if (s == "gate") return Backend::gate;
    throw std::invalid_argument("unknown backend: " + s);
}

/// Good/bad split of the active set under one GoodSpec, surveyed classically
/// once per amplification run. The index list is only materialized on demand
/// (a successful post-selection, or distribution introspection).
struct ClassView {
    std::size_t n_active = 0;
    std::size_t k_good = 0;
    std::vector<std::size_t> good;
    bool good_ready = false;

    static ClassView survey(const Qram& qram, const ActiveSet& active, const GoodSpec& spec) {
        ClassView v;
        v.n_active = active.size();
        active.for_each([&](std::size_t i) {
            if (spec.is_good(qram, i)) ++v.k_good;
        });
        return v;
    }

    void ensure_good_list(const Qram& qram, const ActiveSet& active, const GoodSpec& spec) {
        if (good_ready) return;
        good.reserve(k_good);
        active.for_each([&](std::size_t i) {
            if (spec.is_good(qram, i)) good.push_back(i);
        });
        good_ready = true;
    }
};

/**
 * A post-selected uniform superposition over the good indices, with their
 * utilities attached. sample() probes the output distribution without
 * collapsing; measure() collapses and consumes the handle.
 */
class SuperpositionHandle {
public:
    SuperpositionHandle(std::vector<std::size_t> indices, std::vector<std::uint64_t> utilities)
        : indices_(std::move(indices)), utilities_(std::move(utilities)) {
        if (indices_.empty()) throw std::invalid_argument("handle: empty superposition");
        if (indices_.size() != utilities_.size())
            throw std::invalid_argument("handle: index/utility size mismatch");
    }

    const std::vector<std::size_t>& indices() const { return indices_; }
    const std::vector<std::uint64_t>& utilities() const { return utilities_; }
    std::size_t size() const { return indices_.size(); }
    bool consumed() const { return consumed_; }

    std::pair<std::size_t, std::uint64_t> sample(CounterRng& rng) const {
        std::size_t r = std::size_t(rng.uniform_index(indices_.size()));
        return {indices_[r], utilities_[r]};
    }

    std::pair<std::size_t, std::uint64_t> measure(CounterRng& rng) {
        if (consumed_) throw std::logic_error("handle: already measured");
        consumed_ = true;
        return sample(rng);
    }

private:
    std::vector<std::size_t> indices_;
    std::vector<std::uint64_t> utilities_;
    bool consumed_ = false;
};

/**
 * The simulated register state during one amplification run, in one of three
 * representations:
 *
 *   collapsed  two real amplitudes (good/bad class) advanced by the exact
 *              closed form sin((2s+1) t), t = arcsin sqrt(k/N). Valid because
 *              every operation preserves uniformity within each class, which
 *              the dense backend asserts after every step.
 *   dense      one real amplitude per active index.
 *   gate       full state vector over index/attribute/utility/aux registers.
 *
 * The good-subspace definition (f, theta) is bound at initialization and the
 * state starts uniform over the active indices. All backends expose the same
 * operations and agree on measurement distributions.
 */
class EngineState {
public:
    EngineState(const EngineState&) = delete;
    EngineState& operator=(const EngineState&) = delete;

    EngineState(Backend backend, const Qram& qram, const GoodSpec& spec, const ActiveSet& active,
                ClassView* shared_view = nullptr)
        : backend_(backend), qram_(&qram), spec_(spec), active_(&active), view_(shared_view) {
        if (active.size() == 0) throw std::invalid_argument("engine: empty active set");
        if (!view_) {
            owned_view_ = ClassView::survey(qram, active, spec);
            view_ = &owned_view_;
        }
        const double ratio = double(view_->k_good) / double(view_->n_active);
        t_ = std::asin(std::sqrt(ratio));
        switch (backend_) {
        case Backend::collapsed:
            a_good_ = std::sin(t_);
            a_bad_ = std::cos(t_);
            break;
        case Backend::dense: {
            idx_.reserve(view_->n_active);
            good_flag_.reserve(view_->n_active);
            active.for_each([&](std::size_t i) {
                idx_.push_back(i);
                good_flag_.push_back(spec.is_good(qram, i) ? 1 : 0);
            });
            amp_.assign(idx_.size(), 1.0 / std::sqrt(double(idx_.size())));
            break;
        }
        case Backend::gate: {
            if (!spec.f) throw std::invalid_argument("gate backend: spec must carry a utility function");
            active.for_each([&](std::size_t i) { active_list_.push_back(i); });
            sim_.emplace(qram.dataset().index_bits(), qram.dataset().dims(),
                         qram.dataset().attr_bits(), spec.f->utility_bits());
            sim_->apply_prep(active_list_);
            break;
        }
        }
    }

    Backend backend() const { return backend_; }
    std::size_t iterations() const { return s_; }
    std::size_t active_count() const { return view_->n_active; }
    std::size_t good_count() const { return view_->k_good; }

    /// Signed coefficient on the uniform good-class state.
    double good_amplitude() const {
        switch (backend_) {
        case Backend::collapsed:
            return a_good_;
        case Backend::dense: {
            for (std::size_t p = 0; p < idx_.size(); ++p)
                if (good_flag_[p]) return amp_[p] * std::sqrt(double(view_->k_good));
            return 0.0;
        }
        case Backend::gate: {
            for (std::size_t i = 0; i < qram_->size(); ++i) {
                if (active_->contains(i) && spec_.is_good(*qram_, i)) {
                    auto a = sim_->amplitude(std::size_t(i) << (sim_->qubits() - sim_->index_bits()));
                    return a.real() * std::sqrt(double(view_->k_good));
                }
            }
            return 0.0;
        }
        }
        return 0.0;
    }

    /// alpha^2: probability that post-selection succeeds right now.
    double good_probability() const {
        switch (backend_) {
        case Backend::collapsed:
            return a_good_ * a_good_;
        case Backend::dense: {
            double p = 0.0;
            for (std::size_t q = 0; q < idx_.size(); ++q)
                if (good_flag_[q]) p += amp_[q] * amp_[q];
            return p;
        }
        case Backend::gate: {
            auto marg = sim_->index_marginal();
            double p = 0.0;
            active_->for_each([&](std::size_t i) {
                if (spec_.is_good(*qram_, i)) p += marg[i];
            });
            return p;
        }
        }
        return 0.0;
    }

    /**
     * One full amplification iteration: QRAM read, utility oracle, phase
     * oracle, uncompute, diffusion. Charged per policy. With an empty good
     * set the state is unchanged but the read still costs.
     */
    void grover_iterate(Qram& qram, const IoPolicy& policy) {
        qram.record_quantum_load(policy, LoadContext::grover_iteration);
        ++s_;
        switch (backend_) {
        case Backend::collapsed:
            a_good_ = std::sin(double(2 * s_ + 1) * t_);
            a_bad_ = std::cos(double(2 * s_ + 1) * t_);
            break;
        case Backend::dense:
            dense_iterate();
            break;
        case Backend::gate:
            sim_->apply_qram(qram);
            sim_->apply_utility_oracle(qram, spec_);
            sim_->apply_phase_oracle(spec_, qram.size());
            sim_->apply_qram(qram);
            sim_->apply_utility_oracle(qram, spec_);
            sim_->apply_diffusion(active_list_);
            break;
        }
    }

    /**
     * Append the aux qubit, apply the flip oracle, measure it. On outcome 1
     * the state collapses to the uniform superposition over the good indices
     * and a handle to it is returned; on 0 the attempt failed.
     */
    std::optional<SuperpositionHandle> post_select(Qram& qram, const IoPolicy& policy,
                                                   CounterRng& rng) {
        qram.record_quantum_load(policy, LoadContext::post_selection);
        // The all-good and all-bad splits are certain outcomes; clamping them
        // keeps a stray ulp in sin/cos from producing an impossible branch.
        auto clamp_certain = [this](double p) {
            if (view_->k_good == 0) return 0.0;
            if (view_->k_good == view_->n_active) return 1.0;
            return p;
        };
        bool hit = false;
        switch (backend_) {
        case Backend::collapsed:
            hit = rng.bernoulli(clamp_certain(a_good_ * a_good_));
            a_good_ = hit ? 1.0 : 0.0;
            a_bad_ = hit ? 0.0 : 1.0;
            break;
        case Backend::dense: {
            hit = rng.bernoulli(clamp_certain(good_probability()));
            double mass = 0.0;
            for (std::size_t q = 0; q < idx_.size(); ++q)
                if ((good_flag_[q] != 0) == hit) mass += amp_[q] * amp_[q];
            const double inv = mass > 0.0 ? 1.0 / std::sqrt(mass) : 0.0;
            for (std::size_t q = 0; q < idx_.size(); ++q)
                amp_[q] = (good_flag_[q] != 0) == hit ? std::abs(amp_[q]) * inv : 0.0;
            break;
        }
        case Backend::gate: {
            sim_->apply_qram(qram);
            sim_->apply_utility_oracle(qram, spec_);
            sim_->apply_flip_oracle(spec_, qram.size());
            hit = sim_->measure_qubit(0, rng) == 1;
            sim_->apply_qram(qram);
            sim_->apply_utility_oracle(qram, spec_);
            break;
        }
        }
        if (!hit) return std::nullopt;
        view_->ensure_good_list(*qram_, *active_, spec_);
        std::vector<std::uint64_t> utils;
        utils.reserve(view_->good.size());
        for (std::size_t i : view_->good) utils.push_back(spec_.utility(*qram_, i));
        return SuperpositionHandle(view_->good, std::move(utils));
    }

    /// Probability of measuring each index of the universe right now.
    std::vector<double> index_distribution() {
        std::vector<double> out(qram_->size(), 0.0);
        switch (backend_) {
        case Backend::collapsed: {
            view_->ensure_good_list(*qram_, *active_, spec_);
            const std::size_t k = view_->k_good;
            const std::size_t nb = view_->n_active - k;
            if (nb > 0) {
                const double pb = a_bad_ * a_bad_ / double(nb);
                active_->for_each([&](std::size_t i) { out[i] = pb; });
            }
            if (k > 0) {
                const double pg = a_good_ * a_good_ / double(k);
                for (std::size_t i : view_->good) out[i] = pg;
            }
            break;
        }
        case Backend::dense:
            for (std::size_t q = 0; q < idx_.size(); ++q) out[idx_[q]] = amp_[q] * amp_[q];
            break;
        case Backend::gate: {
            auto marg = sim_->index_marginal();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = marg[i];
            break;
        }
        }
        return out;
    }

    /// Success probability and conditional index distribution of a
    /// post-selection applied now, computed analytically (no sampling, no
    /// state change).
    std::pair<double, std::vector<double>> postselect_analysis() {
        std::vector<double> cond(qram_->size(), 0.0);
        double p = 0.0;
        switch (backend_) {
        case Backend::collapsed: {
            view_->ensure_good_list(*qram_, *active_, spec_);
            p = a_good_ * a_good_;
            if (view_->k_good > 0)
                for (std::size_t i : view_->good) cond[i] = 1.0 / double(view_->k_good);
            break;
        }
        case Backend::dense: {
            p = good_probability();
            if (p > 0.0)
                for (std::size_t q = 0; q < idx_.size(); ++q)
                    if (good_flag_[q]) cond[idx_[q]] = amp_[q] * amp_[q] / p;
            break;
        }
        case Backend::gate: {
            GateSim probe = *sim_;
            probe.apply_qram(*qram_);
            probe.apply_utility_oracle(*qram_, spec_);
            probe.apply_flip_oracle(spec_, qram_->size());
            const std::size_t shift = probe.qubits() - probe.index_bits();
            std::vector<double> mass(qram_->size(), 0.0);
            for (std::size_t b = 1; b < probe.states(); b += 2) {
                std::size_t i = b >> shift;
                double w = std::norm(probe.amplitude(b));
                p += w;
                if (i < mass.size()) mass[i] += w;
            }
            if (p > 0.0)
                for (std::size_t i = 0; i < mass.size(); ++i) cond[i] = mass[i] / p;
            break;
        }
        }
        return {p, std::move(cond)};
    }

    GateSim* gate_sim() { return sim_ ? &*sim_ : nullptr; }

private:
    void dense_iterate() {
        // Phase flip on the good class, then reflection about the mean.
        double sum = 0.0;
        for (std::size_t q = 0; q < idx_.size(); ++q) {
            if (good_flag_[q]) amp_[q] = -amp_[q];
            sum += amp_[q];
        }
        const double twice_mean = 2.0 * sum / double(idx_.size());
        double gmin = 1e300, gmax = -1e300, bmin = 1e300, bmax = -1e300;
        for (std::size_t q = 0; q < idx_.size(); ++q) {
            amp_[q] = twice_mean - amp_[q];
            if (good_flag_[q]) {
                gmin = std::min(gmin, amp_[q]);
                gmax = std::max(gmax, amp_[q]);
            } else {
                bmin = std::min(bmin, amp_[q]);
                bmax = std::max(bmax, amp_[q]);
            }
        }
        if ((view_->k_good > 0 && gmax - gmin > 1e-12) ||
            (view_->k_good < view_->n_active && bmax - bmin > 1e-12))
            throw std::logic_error("dense backend: class uniformity violated");
    }

    Backend backend_;
    const Qram* qram_;
    GoodSpec spec_;
    const ActiveSet* active_;
    ClassView* view_;
    ClassView owned_view_;

    std::size_t s_ = 0;

    // collapsed
    double t_ = 0.0, a_good_ = 0.0, a_bad_ = 1.0;
    // dense
    std::vector<std::size_t> idx_;
    std::vector<double> amp_;
    std::vector<std::uint8_t> good_flag_;
    // gate
    std::vector<std::size_t> active_list_;
    std::optional<GateSim> sim_;
};

} // namespace qpq
