#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "qpq/algorithms.hpp"
#include "qpq/baselines.hpp"
#include "qpq/dataset.hpp"

namespace qpq {

enum class Algo { qqpq_theta, cqpq_theta, cqpq_k, qqpq_k, linear_scan, quick_select };

inline const char* to_string(Algo a) {
    switch (a) {
    case Algo::qqpq_theta: return "qqpq_theta";
    case Algo::cqpq_theta: return "cqpq_theta";
    case Algo::cqpq_k: return "cqpq_k";
    case Algo::qqpq_k: return "qqpq_k";
    case Algo::linear_scan: return "linear_scan";
    case Algo::quick_select: return "quick_select";
    }
    return "?";
}

inline Algo algo_from_string(const std::string& s) {
    if (s == "qqpq_theta") return Algo::qqpq_theta;
    if (s == "cqpq_theta") return Algo::cqpq_theta;
    if (s == "cqpq_k") return Algo::cqpq_k;
    if (s == "qqpq_k") return Algo::qqpq_k;
    if (s == "linear_scan") return Algo::linear_scan;
    if (s == "quick_select") return Algo::quick_select;
    throw std::invalid_argument("unknown algorithm: " + s);
}

inline bool algo_takes_theta(Algo a) {
    return a == Algo::qqpq_theta || a == Algo::cqpq_theta || a == Algo::linear_scan;
}

enum class SweepVar { k, theta_rank, dims, n, category };

inline const char* to_string(SweepVar s) {
    switch (s) {
    case SweepVar::k: return "k";
    case SweepVar::theta_rank: return "theta-rank";
    case SweepVar::dims: return "d";
    case SweepVar::n: return "n";
    case SweepVar::category: return "category";
    }
    return "?";
}

inline SweepVar sweep_from_string(const std::string& s) {
    if (s == "k") return SweepVar::k;
    if (s == "theta-rank" || s == "theta_rank") return SweepVar::theta_rank;
    if (s == "d" || s == "dims") return SweepVar::dims;
    if (s == "n" || s == "N") return SweepVar::n;
    if (s == "category") return SweepVar::category;
    throw std::invalid_argument("unknown sweep variable: " + s);
}

struct ExperimentConfig {
    std::string category = "ANTI";
    std::string csv_path;                  // when set, overrides the synthetic dataset
    std::vector<std::string> csv_columns;
    std::size_t n = 500'000;
    std::size_t dims = 4;
    unsigned attr_bits = 16;
    unsigned util_bits = 32;
    std::size_t k = 10;                    // k (or theta rank) when not swept
    std::vector<Algo> algorithms;          // empty: defaults for the sweep kind
    SweepVar sweep = SweepVar::k;
    std::vector<std::string> sweep_values;
    std::size_t queries = 100;             // independent queries per sweep point
    std::uint64_t seed = 0;
    int retries = 3;
    Backend backend = Backend::collapsed;
    IoPolicy policy = {};
    unsigned threads = 1;                  // 0: hardware concurrency
};

/// One CSV row: a single query of a single algorithm at one sweep point.
struct ResultRow {
    std::string algorithm;
    std::string dataset;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t k_or_theta = 0;
    std::size_t trial = 0;
    std::uint64_t quantum_ios = 0;
    std::uint64_t classical_ios = 0;
    double pq_ios = 0.0;
    double total_ios = 0.0;
    bool success = true;
    std::uint64_t seed = 0;
};

namespace detail {

struct SweepPoint {
    std::shared_ptr<const Dataset> data;
    std::string dataset_name;
    std::size_t n = 0, d = 0, k = 0;
    double x = 0.0; // numeric position on the sweep axis
};

inline std::size_t parse_size(const std::string& s) {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad numeric value: " + s);
    return std::size_t(v);
}

inline std::uint64_t dataset_seed(const ExperimentConfig& cfg, const std::string& category,
                                  std::size_t n, std::size_t d) {
    std::uint64_t h = CounterRng::derive(cfg.seed, 0x64736574ull);
    h = CounterRng::derive(h, n);
    h = CounterRng::derive(h, d);
    for (char c : category) h = CounterRng::derive(h, std::uint64_t(c));
    return h;
}

inline std::uint64_t kth_highest_utility(const Dataset& data, const UtilityFunction& f,
                                         std::size_t rank) {
    std::vector<std::uint64_t> utils(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) utils[i] = f(data.tuple(i));
    std::nth_element(utils.begin(), utils.begin() + (rank - 1), utils.end(),
                     std::greater<std::uint64_t>());
    return utils[rank - 1];
}

inline std::string format_number(double v) {
    char buf[40];
    if (v == std::floor(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

/**
 * Runs `queries` independent queries per (sweep point, algorithm). Every query
 * q at a sweep point draws its own utility function from (seed, point, q), and
 * every (point, algorithm, query) execution owns a fresh memory, ledger and a
 * counter RNG keyed by the same coordinates, so rows are identical whether the
 * trials run serially or on a worker pool. Threshold algorithms take the
 * point's k-th highest utility as theta.
 */
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.sweep_values.empty()) throw std::invalid_argument("experiment: empty sweep");
    if (cfg.queries == 0) throw std::invalid_argument("experiment: queries must be >= 1");

    std::vector<Algo> algos = cfg.algorithms;
    if (algos.empty()) {
        if (cfg.sweep == SweepVar::theta_rank)
            algos = {Algo::cqpq_theta, Algo::linear_scan};
        else
            algos = {Algo::cqpq_k, Algo::quick_select};
    }

    // Resolve sweep points and their datasets (shared across points when the
    // dataset parameters repeat, e.g. a k sweep).
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::shared_ptr<const Dataset>>
        cache;
    auto dataset_for = [&](const std::string& category, std::size_t n,
                           std::size_t d) -> std::shared_ptr<const Dataset> {
        auto key = std::make_tuple(category, n, d);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        std::shared_ptr<const Dataset> ds;
        if (!cfg.csv_path.empty()) {
            if (cfg.sweep == SweepVar::n || cfg.sweep == SweepVar::dims ||
                cfg.sweep == SweepVar::category)
                throw std::invalid_argument("experiment: cannot sweep dataset shape with a CSV dataset");
            ds = std::make_shared<Dataset>(load_csv(cfg.csv_path, cfg.csv_columns, cfg.attr_bits));
        } else {
            ds = std::make_shared<Dataset>(generate_synthetic(
                category_from_string(category), n, d, detail::dataset_seed(cfg, category, n, d),
                cfg.attr_bits));
        }
        cache.emplace(key, ds);
        return ds;
    };

    std::vector<detail::SweepPoint> points;
    for (std::size_t pi = 0; pi < cfg.sweep_values.size(); ++pi) {
        const std::string& sv = cfg.sweep_values[pi];
        detail::SweepPoint pt;
        std::string category = cfg.category;
        pt.n = cfg.n;
        pt.d = cfg.dims;
        pt.k = cfg.k;
        switch (cfg.sweep) {
        case SweepVar::k:
        case SweepVar::theta_rank:
            pt.k = detail::parse_size(sv);
            pt.x = double(pt.k);
            break;
        case SweepVar::dims:
            pt.d = detail::parse_size(sv);
            pt.x = double(pt.d);
            break;
        case SweepVar::n:
            pt.n = detail::parse_size(sv);
            pt.x = double(pt.n);
            break;
        case SweepVar::category:
            category = to_string(category_from_string(sv));
            pt.x = double(pi + 1);
            break;
        }
        pt.data = dataset_for(category, pt.n, pt.d);
        pt.n = pt.data->size();
        pt.d = pt.data->dims();
        pt.dataset_name = pt.data->meta().name;
        if (pt.k < 1 || pt.k > pt.n)
            throw std::invalid_argument("experiment: k outside [1, N] at sweep value " + sv);
        points.push_back(std::move(pt));
    }

    const bool wants_theta =
        std::any_of(algos.begin(), algos.end(), [](Algo a) { return algo_takes_theta(a); });

    // Per (point, query): the utility function, shared by all algorithms so
    // they answer the same query, and its resolved threshold when needed.
    std::vector<std::vector<UtilityFunction>> fs(points.size());
    std::vector<std::vector<std::uint64_t>> thetas(points.size());
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        fs[pi].reserve(cfg.queries);
        thetas[pi].assign(cfg.queries, 0);
        for (std::size_t q = 0; q < cfg.queries; ++q) {
            std::uint64_t fseed =
                CounterRng::derive(CounterRng::derive(cfg.seed, 0x66716572ull + pi), q);
            fs[pi].push_back(
                random_query(points[pi].d, fseed, cfg.attr_bits, cfg.util_bits));
            if (wants_theta)
                thetas[pi][q] = detail::kth_highest_utility(*points[pi].data, fs[pi][q], points[pi].k);
        }
    }

    struct Task {
        std::size_t point, algo, trial;
    };
    std::vector<Task> tasks;
    tasks.reserve(points.size() * algos.size() * cfg.queries);
    for (std::size_t pi = 0; pi < points.size(); ++pi)
        for (std::size_t ai = 0; ai < algos.size(); ++ai)
            for (std::size_t q = 0; q < cfg.queries; ++q) tasks.push_back({pi, ai, q});

    std::vector<ResultRow> rows(tasks.size());
    auto run_task = [&](std::size_t ti) {
        const Task& t = tasks[ti];
        const detail::SweepPoint& pt = points[t.point];
        const Algo algo = algos[t.algo];
        const UtilityFunction& f = fs[t.point][t.trial];
        std::uint64_t key = CounterRng::derive(cfg.seed, 0x72756e00ull + t.point);
        key = CounterRng::derive(key, 1000 + std::size_t(algo));
        key = CounterRng::derive(key, t.trial);
        CounterRng rng(key);

        QpqParams params{cfg.backend, cfg.policy, cfg.retries};
        IoLedger led;
        bool success = true;
        switch (algo) {
        case Algo::qqpq_theta: {
            Qram qram(*pt.data);
            auto out = qqpq_theta(qram, f, thetas[t.point][t.trial], rng, params);
            led = out.ledger;
            success = out.success();
            break;
        }
        case Algo::cqpq_theta: {
            Qram qram(*pt.data);
            auto out = cqpq_theta(qram, f, thetas[t.point][t.trial], rng, params);
            led = out.ledger;
            success = out.success();
            break;
        }
        case Algo::cqpq_k: {
            Qram qram(*pt.data);
            auto out = cqpq_k(qram, f, pt.k, rng, params);
            led = out.ledger;
            success = out.success();
            break;
        }
        case Algo::qqpq_k: {
            Qram qram(*pt.data);
            auto out = qqpq_k(qram, f, pt.k, rng, params);
            led = out.ledger;
            success = out.success();
            break;
        }
        case Algo::linear_scan:
            linear_scan(*pt.data, f, thetas[t.point][t.trial], led, cfg.policy);
            break;
        case Algo::quick_select:
            quick_select(*pt.data, f, pt.k, led, rng, cfg.policy);
            break;
        }

        ResultRow& row = rows[ti];
        row.algorithm = to_string(algo);
        row.dataset = pt.dataset_name;
        row.n = pt.n;
        row.d = pt.d;
        row.k_or_theta = pt.k;
        row.trial = t.trial;
        row.quantum_ios = led.quantum_reads;
        row.classical_ios = led.classical_total();
        row.pq_ios = led.pq_ops;
        row.total_ios = led.total();
        row.success = success;
        row.seed = key;
    };

    unsigned workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                        : cfg.threads;
    workers = std::min<unsigned>(workers, unsigned(tasks.size()));
    if (workers <= 1) {
        for (std::size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t ti = next.fetch_add(1); ti < tasks.size();
                     ti = next.fetch_add(1))
                    run_task(ti);
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

inline double mean_total_ios(const std::vector<ResultRow>& rows, const std::string& algo) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : rows)
        if (r.algorithm == algo) {
            sum += r.total_ios;
            ++count;
        }
    if (count == 0) throw std::invalid_argument("no rows for algorithm " + algo);
    return sum / double(count);
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_csv: cannot write " + path);
    out << "algorithm,dataset,N,d,k_or_theta,trial,quantum_ios,classical_ios,pq_ios,total_ios,"
           "success,seed\n";
    for (const auto& r : rows) {
        out << r.algorithm << ',' << r.dataset << ',' << r.n << ',' << r.d << ',' << r.k_or_theta
            << ',' << r.trial << ',' << r.quantum_ios << ',' << r.classical_ios << ','
            << detail::format_number(r.pq_ios) << ',' << detail::format_number(r.total_ios) << ','
            << (r.success ? 1 : 0) << ',' << r.seed << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

namespace detail {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> pts; // (x, mean total)
};

inline std::vector<ChartSeries> chart_series(const std::vector<ResultRow>& rows, SweepVar sweep) {
    // x per row mirrors run_experiment's sweep axis.
    std::vector<std::string> cat_order;
    auto x_of = [&](const ResultRow& r) -> double {
        switch (sweep) {
        case SweepVar::k:
        case SweepVar::theta_rank: return double(r.k_or_theta);
        case SweepVar::dims: return double(r.d);
        case SweepVar::n: return double(r.n);
        case SweepVar::category: {
            auto it = std::find(cat_order.begin(), cat_order.end(), r.dataset);
            if (it == cat_order.end()) {
                cat_order.push_back(r.dataset);
                return double(cat_order.size());
            }
            return double(it - cat_order.begin() + 1);
        }
        }
        return 1.0;
    };
    std::vector<ChartSeries> series;
    std::map<std::pair<std::string, double>, std::pair<double, std::size_t>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[{r.algorithm, x_of(r)}];
        slot.first += r.total_ios;
        slot.second += 1;
    }
    for (const auto& [key, v] : acc) {
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const ChartSeries& s) { return s.name == key.first; });
        if (it == series.end()) {
            series.push_back({key.first, {}});
            it = series.end() - 1;
        }
        it->pts.emplace_back(key.second, v.first / double(v.second));
    }
    for (auto& s : series) std::sort(s.pts.begin(), s.pts.end());
    return series;
}

} // namespace detail

/**
 * Minimal self-contained SVG line chart of mean total IOs per algorithm over
 * the sweep axis. IO axis is log-scale over whole decades, padded one decade
 * past the data on each side.
 */
inline void emit_chart(const std::vector<ResultRow>& rows, SweepVar sweep,
                       const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_chart: no rows");
    auto series = detail::chart_series(rows, sweep);

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, std::max(y, 0.1));
            ymax = std::max(ymax, std::max(y, 0.1));
        }
    const int ylo = int(std::floor(std::log10(ymin))) - 1;
    const int yhi = int(std::ceil(std::log10(ymax))) + 1;
    const double lxmin = std::log10(std::max(xmin, 0.5));
    const double lxmax = std::log10(std::max(xmax, 0.5)) + (xmin == xmax ? 1.0 : 0.0);

    const double px0 = 80, px1 = 840, py0 = 560, py1 = 50;
    auto sx = [&](double x) {
        double lx = std::log10(std::max(x, 0.5));
        return lxmax > lxmin ? px0 + (lx - lxmin) / (lxmax - lxmin) * (px1 - px0) : px0;
    };
    auto sy = [&](double y) {
        double ly = std::log10(std::max(y, 0.1));
        return py0 + (ly - ylo) / double(yhi - ylo) * (py1 - py0);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_chart: cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"620\" "
           "font-family=\"sans-serif\" font-size=\"13\">\n"
        << "<rect width=\"880\" height=\"620\" fill=\"white\"/>\n"
        << "<text x=\"440\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">mean IOs vs "
        << to_string(sweep) << "</text>\n";

    // decade gridlines and labels on the IO axis
    for (int e = ylo; e <= yhi; ++e) {
        double y = sy(std::pow(10.0, e));
        out << "<line x1=\"" << px0 << "\" y1=\"" << y << "\" x2=\"" << px1 << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << px0 - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    // x ticks at swept values
    std::vector<double> xs;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
        out << "<line x1=\"" << sx(x) << "\" y1=\"" << py0 << "\" x2=\"" << sx(x) << "\" y2=\""
            << py0 + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << sx(x) << "\" y=\"" << py0 + 20 << "\" text-anchor=\"middle\">"
            << detail::format_number(x) << "</text>\n";
    }
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1
        << "\" stroke=\"black\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = palette[si % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (auto [x, y] : series[si].pts) out << sx(x) << ',' << sy(y) << ' ';
        out << "\"/>\n";
        for (auto [x, y] : series[si].pts)
            out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        double ly = 50 + 20 * double(si);
        out << "<line x1=\"700\" y1=\"" << ly << "\" x2=\"730\" y2=\"" << ly << "\" stroke=\""
            << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"736\" y=\"" << ly + 4 << "\">" << series[si].name << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("emit_chart: write failed for " + path);
}

/// Decade range of the chart's IO axis for the given rows, [10^lo, 10^hi].
inline std::pair<double, double> chart_io_axis_range(const std::vector<ResultRow>& rows,
                                                     SweepVar sweep) {
    auto series = detail::chart_series(rows, sweep);
    double ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            ymin = std::min(ymin, std::max(y, 0.1));
            ymax = std::max(ymax, std::max(y, 0.1));
        }
    const int ylo = int(std::floor(std::log10(ymin))) - 1;
    const int yhi = int(std::ceil(std::log10(ymax))) + 1;
    return {std::pow(10.0, ylo), std::pow(10.0, yhi)};
}

} // namespace qpq
