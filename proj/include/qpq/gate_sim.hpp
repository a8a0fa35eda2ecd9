#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpq/qram.hpp"
#include "qpq/rng.hpp"

namespace qpq {

/// Good-subspace description shared by all engine backends: indices whose
/// dummy-aware utility clears the threshold, optionally restricted to an
/// explicit member set (used to pin exact top-k membership under ties).
struct GoodSpec {
    const UtilityFunction* f = nullptr;
    std::uint64_t theta = 0;
    const std::vector<std::uint64_t>* util_cache = nullptr; // raw f(p_i) per index
    const std::vector<std::uint8_t>* members = nullptr;     // universe-sized mask

    std::uint64_t utility(const Qram& q, std::size_t i) const {
        if (util_cache) return q.is_dummy(i) ? 0 : (*util_cache)[i];
        return q.utility(*f, i);
    }
    bool is_good(const Qram& q, std::size_t i) const {
        if (members && !(*members)[i]) return false;
        return utility(q, i) >= theta;
    }
};

/**
 * Full state-vector simulation of the amplification circuit on
 * n + d*attr_bits + utility_bits + 1 qubits, laid out as
 * [ index | attributes (first dimension highest) | utility | aux ], aux = bit 0.
 * Tiny instances only; this backend exists to validate the other two at the
 * gate level. Amplitudes are stored complex and every operation checks that
 * the norm is preserved and the imaginary parts stay at zero.
 */
class GateSim {
public:
    static constexpr unsigned kMaxQubits = 24;

    GateSim(unsigned index_bits, std::size_t dims, unsigned attr_bits, unsigned util_bits)
        : n_(index_bits), d_(dims), na_(attr_bits), nu_(util_bits),
          attr_shift_(1 + util_bits), index_shift_(1 + util_bits + unsigned(dims) * attr_bits),
          qubits_(index_shift_ + index_bits) {
        if (qubits_ > kMaxQubits)
            throw std::invalid_argument("gate backend: qubit budget exceeded (" +
                                        std::to_string(qubits_) + " > 24)");
        amp_.assign(std::size_t(1) << qubits_, {0.0, 0.0});
        amp_[0] = 1.0;
    }

    unsigned qubits() const { return qubits_; }
    unsigned index_bits() const { return n_; }
    std::size_t states() const { return amp_.size(); }
    std::complex<double> amplitude(std::size_t basis) const { return amp_[basis]; }

    std::size_t index_of(std::size_t b) const { return b >> index_shift_; }
    std::uint64_t util_of(std::size_t b) const { return (b >> 1) & util_mask(); }
    std::uint64_t attr_field_of(std::size_t b) const {
        return (b >> attr_shift_) & ((std::uint64_t(1) << (d_ * na_)) - 1);
    }

    void reset_zero() {
        std::fill(amp_.begin(), amp_.end(), std::complex<double>(0.0, 0.0));
        amp_[0] = 1.0;
    }

    /**
     * Uniform preparation of the index register over the given index values.
     * Literal Hadamard transform when the values fill the register; otherwise
     * the Householder reflection exchanging |0...0> with the uniform state.
     * Self-inverse either way, so it doubles as the prep inverse in diffusion.
     */
    void apply_prep(std::span<const std::size_t> active) {
        if (active.empty()) throw std::invalid_argument("gate prep: empty active set");
        if (active.size() == (std::size_t(1) << n_)) {
            for (unsigned t = 0; t < n_; ++t) hadamard_bit(index_shift_ + t);
        } else {
            householder_prep(active);
        }
        check_state();
    }

    /// Superposed load: XOR each branch's attribute registers with its tuple.
    void apply_qram(const Qram& qram) {
        const std::size_t n_cells = qram.size();
        std::vector<std::uint64_t> packed(n_cells);
        for (std::size_t i = 0; i < n_cells; ++i) packed[i] = pack_attrs(qram.load(i));
        permute([&](std::size_t b) {
            std::size_t i = index_of(b);
            return i < n_cells ? b ^ (packed[i] << attr_shift_) : b;
        });
        check_state();
    }

    /**
     * Utility oracle: XOR f's score into the utility register. The score is
     * taken per index so that dummy cells contribute the minimum utility the
     * stored mark dictates.
     */
    void apply_utility_oracle(const Qram& qram, const GoodSpec& spec) {
        const std::size_t n_cells = qram.size();
        std::vector<std::uint64_t> score(n_cells);
        for (std::size_t i = 0; i < n_cells; ++i) score[i] = spec.utility(qram, i) & util_mask();
        permute([&](std::size_t b) {
            std::size_t i = index_of(b);
            return i < n_cells ? b ^ (score[i] << 1) : b;
        });
        check_state();
    }

    /// G_theta: multiply by -1 every branch whose utility register clears theta.
    void apply_phase_oracle(const GoodSpec& spec, std::size_t n_cells) {
        for (std::size_t b = 0; b < amp_.size(); ++b)
            if (oracle_hit(spec, b, n_cells)) amp_[b] = -amp_[b];
        check_state();
    }

    /// R: flip the sign of every index-register value except zero.
    void apply_reflect_nonzero() {
        for (std::size_t b = 0; b < amp_.size(); ++b)
            if (index_of(b) != 0) amp_[b] = -amp_[b];
        check_state();
    }

    /// Diffusion prep . R . prep, the reflection about the uniform state.
    void apply_diffusion(std::span<const std::size_t> active) {
        apply_prep(active);
        apply_reflect_nonzero();
        apply_prep(active);
    }

    /// O_theta: flip the aux qubit on branches whose utility clears theta.
    void apply_flip_oracle(const GoodSpec& spec, std::size_t n_cells) {
        for (std::size_t b = 0; b < amp_.size(); b += 2)
            if (oracle_hit(spec, b, n_cells)) std::swap(amp_[b], amp_[b | 1]);
        check_state();
    }

    /// Projective measurement of one qubit; collapses and renormalizes.
    int measure_qubit(unsigned bit, CounterRng& rng) {
        const std::size_t mask = std::size_t(1) << bit;
        long double p1 = 0.0L;
        for (std::size_t b = 0; b < amp_.size(); ++b)
            if (b & mask) p1 += std::norm(amp_[b]);
        const int outcome = rng.uniform() < double(p1) ? 1 : 0;
        const long double keep = outcome ? p1 : 1.0L - p1;
        if (keep <= 0.0L) throw std::logic_error("gate measure: impossible outcome");
        const double inv = 1.0 / std::sqrt(double(keep));
        for (std::size_t b = 0; b < amp_.size(); ++b) {
            if (((b & mask) != 0) != (outcome != 0))
                amp_[b] = 0.0;
            else
                amp_[b] *= inv;
        }
        check_state();
        return outcome;
    }

    /// Probability of each index-register value (marginal over other registers).
    std::vector<double> index_marginal() const {
        std::vector<double> out(std::size_t(1) << n_, 0.0);
        for (std::size_t b = 0; b < amp_.size(); ++b) out[index_of(b)] += std::norm(amp_[b]);
        return out;
    }

    double norm_error() const {
        long double s = 0.0L;
        for (const auto& a : amp_) s += std::norm(a);
        return double(std::abs(s - 1.0L));
    }

    double max_imag() const {
        double m = 0.0;
        for (const auto& a : amp_) m = std::max(m, std::abs(a.imag()));
        return m;
    }

private:
    std::uint64_t util_mask() const { return (std::uint64_t(1) << nu_) - 1; }

    std::uint64_t pack_attrs(std::span<const std::uint32_t> attrs) const {
        std::uint64_t field = 0;
        for (std::size_t j = 0; j < d_; ++j)
            field |= std::uint64_t(attrs[j]) << ((d_ - 1 - j) * na_);
        return field;
    }

    bool oracle_hit(const GoodSpec& spec, std::size_t b, std::size_t n_cells) const {
        if (util_of(b) < spec.theta) return false;
        if (spec.members) {
            std::size_t i = index_of(b);
            if (i >= n_cells || !(*spec.members)[i]) return false;
        }
        return true;
    }

    template <class Map>
    void permute(Map&& to) {
        scratch_.assign(amp_.size(), {0.0, 0.0});
        for (std::size_t b = 0; b < amp_.size(); ++b) scratch_[to(b)] = amp_[b];
        amp_.swap(scratch_);
    }

    void hadamard_bit(unsigned bit) {
        const std::size_t mask = std::size_t(1) << bit;
        constexpr double inv_sqrt2 = 0.70710678118654752440084436210485;
        for (std::size_t b = 0; b < amp_.size(); ++b) {
            if (b & mask) continue;
            const auto a0 = amp_[b];
            const auto a1 = amp_[b | mask];
            amp_[b] = (a0 + a1) * inv_sqrt2;
            amp_[b | mask] = (a0 - a1) * inv_sqrt2;
        }
    }

    void householder_prep(std::span<const std::size_t> active) {
        const double iu = 1.0 / std::sqrt(double(active.size()));
        bool zero_active = false;
        for (std::size_t a : active)
            if (a == 0) zero_active = true;
        const double v0 = 1.0 - (zero_active ? iu : 0.0);
        const double vv = zero_active ? 2.0 * (1.0 - iu) : 2.0;
        if (vv < 1e-15) return; // active == {0}: prep is the identity
        const std::size_t block = std::size_t(1) << index_shift_;
        for (std::size_t rest = 0; rest < block; ++rest) {
            std::complex<double> dot = v0 * amp_[rest];
            for (std::size_t a : active)
                if (a != 0) dot -= iu * amp_[(a << index_shift_) | rest];
            const std::complex<double> scale = 2.0 * dot / vv;
            amp_[rest] -= scale * v0;
            for (std::size_t a : active)
                if (a != 0) amp_[(a << index_shift_) | rest] += scale * iu;
        }
    }

    void check_state() const {
        if (norm_error() > 1e-12) throw std::logic_error("gate backend: norm drifted");
        if (max_imag() > 1e-12) throw std::logic_error("gate backend: amplitudes left the real span");
    }

    unsigned n_;
    std::size_t d_;
    unsigned na_, nu_;
    unsigned attr_shift_, index_shift_, qubits_;
    std::vector<std::complex<double>> amp_;
    std::vector<std::complex<double>> scratch_;
};

} // namespace qpq
