#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpq/dataset.hpp"
#include "qpq/ledger.hpp"
#include "qpq/rng.hpp"

namespace qpq {

/// Full scan: returns every tuple scoring at least theta, in index order.
/// Costs one classical read per tuple (page-adjusted).
inline std::vector<std::pair<std::size_t, std::uint64_t>>
linear_scan(const Dataset& data, const UtilityFunction& f, std::uint64_t theta, IoLedger& ledger,
            const IoPolicy& policy = {}) {
    record_classical_access(ledger, Access::read, data.size(), policy);
    std::vector<std::pair<std::size_t, std::uint64_t>> out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint64_t u = f(data.tuple(i));
        if (u >= theta) out.emplace_back(i, u);
    }
    return out;
}

/**
 * Random-pivot quickselect for the k best tuples under (utility desc, index
 * asc). Every tuple examined by a partitioning pass costs one classical read,
 * pivot included, so the expected charge is around 2N.
 */
inline std::vector<std::pair<std::size_t, std::uint64_t>>
quick_select(const Dataset& data, const UtilityFunction& f, std::size_t k, IoLedger& ledger,
             CounterRng& rng, const IoPolicy& policy = {}) {
    const std::size_t n = data.size();
    if (k == 0) throw std::invalid_argument("quick_select: k must be >= 1");
    if (k > n) throw std::invalid_argument("quick_select: k exceeds dataset size");

    struct Scored {
        std::uint64_t utility;
        std::size_t index;
    };
    auto better = [](const Scored& a, const Scored& b) {
        return a.utility != b.utility ? a.utility > b.utility : a.index < b.index;
    };

    std::vector<Scored> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back({f(data.tuple(i)), i});

    std::size_t lo = 0, hi = n - 1;
    const std::size_t target = k - 1;
    while (lo < hi) {
        record_classical_access(ledger, Access::read, hi - lo + 1, policy);
        const Scored pivot = v[lo + std::size_t(rng.uniform_index(hi - lo + 1))];
        std::size_t i = lo, j = hi;
        while (true) {
            while (better(v[i], pivot)) ++i;
            while (better(pivot, v[j])) --j;
            if (i >= j) break;
            std::swap(v[i], v[j]);
            ++i;
            --j;
        }
        if (target <= j)
            hi = j;
        else
            lo = j + 1;
    }

    std::vector<std::pair<std::size_t, std::uint64_t>> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.emplace_back(v[i].index, v[i].utility);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

enum class Theorem { t1, t2, t3 };

inline const char* to_string(Theorem t) {
    switch (t) {
    case Theorem::t1: return "T1";
    case Theorem::t2: return "T2";
    case Theorem::t3: return "T3";
    }
    return "?";
}

inline Theorem theorem_from_string(const std::string& s) {
    if (s == "T1" || s == "t1") return Theorem::t1;
    if (s == "T2" || s == "t2") return Theorem::t2;
    if (s == "T3" || s == "t3") return Theorem::t3;
    throw std::invalid_argument("unknown theorem: " + s);
}

/// Closed-form average-IO bounds:
///   T1  (9/2) sqrt(N/k)                    quantum-output threshold query
///   T2  9 sqrt(N k)                        classical-output threshold query
///   T3  (9 pi/2) sqrt(N k) + k log2(k) ln N   classical-output top-k query
inline double bound(Theorem theorem, std::size_t n, std::size_t k) {
    if (n < 1 || k < 1 || k > n) throw std::invalid_argument("bound: need 1 <= k <= N");
    const double dn = double(n), dk = double(k);
    switch (theorem) {
    case Theorem::t1: return 4.5 * std::sqrt(dn / dk);
    case Theorem::t2: return 9.0 * std::sqrt(dn * dk);
    case Theorem::t3:
        return 4.5 * 3.1415926535897932384626433832795 * std::sqrt(dn * dk) +
               (k > 1 ? dk * std::log2(dk) * std::log(dn) : 0.0);
    }
    return 0.0;
}

struct BoundReport {
    Theorem theorem;
    std::size_t n = 0, k = 0;
    double bound_value = 0.0;
    double observed_mean = 0.0;
    std::size_t trials = 0;
    bool within_bound = false;
};

} // namespace qpq
