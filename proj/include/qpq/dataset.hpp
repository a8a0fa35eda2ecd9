#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpq/rng.hpp"

namespace qpq {

inline unsigned ceil_log2(std::size_t n) {
    unsigned b = 0;
    while ((std::size_t(1) << b) < n) ++b;
    return b;
}

/// One record: d attribute values, each an attr_bits-wide unsigned integer.
struct Tuple {
    std::vector<std::uint32_t> attrs;
};

struct DatasetMeta {
    std::string name;
    std::string category;
    std::uint64_t seed = 0;
};

/**
 * Immutable collection of quantized tuples. The position of a tuple is its
 * identity for the lifetime of the dataset; attributes are stored row-major.
 */
class Dataset {
public:
    Dataset(std::size_t dims, unsigned attr_bits, std::vector<std::uint32_t> flat_attrs,
            DatasetMeta meta = {})
        : dims_(dims), attr_bits_(attr_bits), attrs_(std::move(flat_attrs)), meta_(std::move(meta)) {
        if (dims_ == 0) throw std::invalid_argument("dataset: dims must be >= 1");
        if (attr_bits_ == 0 || attr_bits_ > 32)
            throw std::invalid_argument("dataset: attr_bits must be in [1, 32]");
        if (attrs_.empty() || attrs_.size() % dims_ != 0)
            throw std::invalid_argument("dataset: attribute matrix shape mismatch");
        const std::uint64_t limit = attr_limit();
        for (std::uint32_t a : attrs_)
            if (a >= limit) throw std::invalid_argument("dataset: attribute exceeds attr_bits range");
    }

    std::size_t size() const { return attrs_.size() / dims_; }
    std::size_t dims() const { return dims_; }
    unsigned attr_bits() const { return attr_bits_; }
    std::uint64_t attr_limit() const { return std::uint64_t(1) << attr_bits_; }

    /// Qubit count needed to address every tuple index.
    unsigned index_bits() const { return ceil_log2(size()); }

    std::span<const std::uint32_t> tuple(std::size_t i) const {
        return {attrs_.data() + i * dims_, dims_};
    }

    const DatasetMeta& meta() const { return meta_; }

private:
    std::size_t dims_;
    unsigned attr_bits_;
    std::vector<std::uint32_t> attrs_;
    DatasetMeta meta_;
};

/**
 * Scores a tuple as an unsigned integer utility of utility_bits width.
 * Values are clamped (saturated) at 2^utility_bits - 1 so that threshold
 * comparisons stay monotone; negative raw scores clamp to 0.
 */
class UtilityFunction {
public:
    enum class Kind { linear, l2norm, custom };

    using Expr = std::function<double(std::span<const std::uint32_t>)>;

    static UtilityFunction linear(std::vector<double> weights, unsigned attr_bits = 16,
                                  unsigned utility_bits = 32) {
        double s = default_scale(utility_bits, attr_bits, weights.size());
        return linear_scaled(std::move(weights), s, utility_bits);
    }

    static UtilityFunction linear_scaled(std::vector<double> weights, double scale,
                                         unsigned utility_bits = 32) {
        if (weights.empty()) throw std::invalid_argument("utility: no weights");
        for (double w : weights)
            if (w < 0.0) throw std::invalid_argument("utility: negative weight");
        UtilityFunction f(Kind::linear, weights.size(), scale, utility_bits);
        f.weights_ = std::move(weights);
        return f;
    }

    static UtilityFunction l2norm(std::size_t dims, double scale = 1.0,
                                  unsigned utility_bits = 32) {
        return UtilityFunction(Kind::l2norm, dims, scale, utility_bits);
    }

    static UtilityFunction custom(std::size_t dims, Expr expr, double scale = 1.0,
                                  unsigned utility_bits = 32) {
        UtilityFunction f(Kind::custom, dims, scale, utility_bits);
        f.expr_ = std::move(expr);
        return f;
    }

    /// Fixed-point scale that keeps a weighted sum of attr_bits values inside
    /// utility_bits before clamping: 2^(nu - na - ceil(log2 d)).
    static double default_scale(unsigned utility_bits, unsigned attr_bits, std::size_t dims) {
        int e = int(utility_bits) - int(attr_bits) - int(ceil_log2(std::max<std::size_t>(dims, 1)));
        return std::ldexp(1.0, e);
    }

    std::uint64_t operator()(std::span<const std::uint32_t> attrs) const {
        if (attrs.size() != dims_) throw std::invalid_argument("utility: dimension mismatch");
        double raw = 0.0;
        switch (kind_) {
        case Kind::linear:
            for (std::size_t j = 0; j < dims_; ++j) raw += weights_[j] * double(attrs[j]);
            break;
        case Kind::l2norm: {
            double s = 0.0;
            for (std::uint32_t a : attrs) s += double(a) * double(a);
            raw = std::sqrt(s);
            break;
        }
        case Kind::custom:
            raw = expr_(attrs);
            break;
        }
        double scaled = scale_ * raw;
        if (!(scaled > 0.0)) return 0;
        if (scaled >= double(max_utility())) return max_utility();
        return std::uint64_t(std::llround(scaled));
    }

    std::uint64_t operator()(const Tuple& t) const { return (*this)(std::span(t.attrs)); }

    Kind kind() const { return kind_; }
    std::size_t dims() const { return dims_; }
    double scale() const { return scale_; }
    unsigned utility_bits() const { return utility_bits_; }
    std::uint64_t max_utility() const {
        return utility_bits_ >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << utility_bits_) - 1;
    }
    const std::vector<double>& weights() const { return weights_; }

private:
    UtilityFunction(Kind kind, std::size_t dims, double scale, unsigned utility_bits)
        : kind_(kind), dims_(dims), scale_(scale), utility_bits_(utility_bits) {
        if (dims_ == 0) throw std::invalid_argument("utility: dims must be >= 1");
        if (utility_bits_ == 0 || utility_bits_ > 63)
            throw std::invalid_argument("utility: utility_bits must be in [1, 63]");
        if (!(scale_ > 0.0)) throw std::invalid_argument("utility: scale must be positive");
    }

    Kind kind_;
    std::size_t dims_;
    double scale_;
    unsigned utility_bits_;
    std::vector<double> weights_;
    Expr expr_;
};

enum class Category { anti, corr, inde };

inline const char* to_string(Category c) {
    switch (c) {
    case Category::anti: return "ANTI";
    case Category::corr: return "CORR";
    case Category::inde: return "INDE";
    }
    return "?";
}

inline Category category_from_string(const std::string& s) {
    if (s == "ANTI" || s == "anti") return Category::anti;
    if (s == "CORR" || s == "corr") return Category::corr;
    if (s == "INDE" || s == "inde") return Category::inde;
    throw std::invalid_argument("unknown dataset category: " + s);
}

/**
 * Synthetic data in the three classic distributions. All attributes live on
 * [0, 1) before quantization to attr_bits:
 *   INDE  x_j ~ U[0,1) i.i.d.
 *   CORR  x_j = clamp(u + 0.10 g_j), u ~ U[0,1): Gaussian spread around the
 *         main diagonal, strongly positive pairwise correlation.
 *   ANTI  row sum s ~ N(d/2, 0.05 d) split across attributes by normalized
 *         uniform shares: Gaussian spread around the hyperplane sum(x) = d/2,
 *         negative pairwise correlation.
 * Deterministic for a fixed (category, n, d, seed).
 */
inline Dataset generate_synthetic(Category category, std::size_t n, std::size_t d,
                                  std::uint64_t seed, unsigned attr_bits = 16) {
    if (n == 0) throw std::invalid_argument("generate_synthetic: n must be >= 1");
    if (d == 0) throw std::invalid_argument("generate_synthetic: d must be >= 1");
    CounterRng rng(seed, 0x64617461ull);
    const double top = double((std::uint64_t(1) << attr_bits) - 1);
    auto clamp01 = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };

    std::vector<std::uint32_t> flat;
    flat.reserve(n * d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        switch (category) {
        case Category::inde:
            for (std::size_t j = 0; j < d; ++j) row[j] = rng.uniform();
            break;
        case Category::corr: {
            double base = rng.uniform();
            for (std::size_t j = 0; j < d; ++j) row[j] = clamp01(base + 0.10 * rng.gaussian());
            break;
        }
        case Category::anti: {
            double s = 0.5 * double(d) + 0.05 * double(d) * rng.gaussian();
            if (s < 0.0) s = 0.0;
            double total = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                row[j] = rng.uniform();
                total += row[j];
            }
            if (total < 1e-12) total = 1.0;
            for (std::size_t j = 0; j < d; ++j) row[j] = clamp01(s * row[j] / total);
            break;
        }
        }
        for (std::size_t j = 0; j < d; ++j)
            flat.push_back(std::uint32_t(std::llround(row[j] * top)));
    }
    return Dataset(d, attr_bits,
                   std::move(flat),
                   DatasetMeta{std::string(to_string(category)), to_string(category), seed});
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

} // namespace detail

/**
 * Loads selected numeric columns of a headered CSV file and quantizes each
 * column min-max onto [0, 2^attr_bits - 1]. Row order becomes index order.
 * A constant column (degenerate range) quantizes to all zeros.
 */
inline Dataset load_csv(const std::string& path, const std::vector<std::string>& columns,
                        unsigned attr_bits = 16) {
    if (columns.empty()) throw std::invalid_argument("load_csv: no columns selected");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
    auto header = detail::split_csv_line(line);
    std::vector<std::size_t> pos;
    for (const auto& want : columns) {
        auto it = std::find(header.begin(), header.end(), want);
        if (it == header.end())
            throw std::invalid_argument("load_csv: column not found: " + want);
        pos.push_back(std::size_t(it - header.begin()));
    }

    const std::size_t d = columns.size();
    std::vector<double> raw;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        for (std::size_t j = 0; j < d; ++j) {
            if (pos[j] >= cells.size())
                throw std::runtime_error("load_csv: short row " + std::to_string(rows + 1));
            const std::string& cell = cells[pos[j]];
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw std::runtime_error("load_csv: non-numeric cell '" + cell + "' in row " +
                                         std::to_string(rows + 1));
            raw.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("load_csv: no data rows in " + path);

    const double top = double((std::uint64_t(1) << attr_bits) - 1);
    std::vector<std::uint32_t> flat(rows * d);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = raw[j], hi = raw[j];
        for (std::size_t i = 1; i < rows; ++i) {
            lo = std::min(lo, raw[i * d + j]);
            hi = std::max(hi, raw[i * d + j]);
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < rows; ++i) {
            double x = range > 0.0 ? (raw[i * d + j] - lo) / range : 0.0;
            flat[i * d + j] = std::uint32_t(std::llround(x * top));
        }
    }
    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    return Dataset(d, attr_bits, std::move(flat), DatasetMeta{name, "CSV", 0});
}

/// Linear utility with weights drawn uniformly from the probability simplex.
inline UtilityFunction random_query(std::size_t d, std::uint64_t seed, unsigned attr_bits = 16,
                                    unsigned utility_bits = 32) {
    if (d == 0) throw std::invalid_argument("random_query: d must be >= 1");
    CounterRng rng(seed, 0x71756572ull);
    std::vector<double> w(d);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double u = rng.uniform();
        w[j] = -std::log(1.0 - u);
        total += w[j];
    }
    for (std::size_t j = 0; j < d; ++j) w[j] /= total;
    return UtilityFunction::linear(std::move(w), attr_bits, utility_bits);
}

} // namespace qpq
