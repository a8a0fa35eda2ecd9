#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpq/qpq.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct CommonOpts {
    std::string category = "ANTI";
    std::string dataset_csv;
    std::string columns;
    std::size_t n = 500'000;
    std::size_t d = 4;
    unsigned attr_bits = 16;
    unsigned util_bits = 32;
    std::uint64_t seed = 0;
    std::string backend = "collapsed";
    int retries = 3;
    std::string io_policy = "default";
    unsigned grover_reads = 1;
    std::uint64_t page = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--category", o.category, "synthetic dataset category: ANTI, CORR or INDE");
    cmd->add_option("--dataset", o.dataset_csv, "CSV dataset path (overrides --category)");
    cmd->add_option("--columns", o.columns, "comma-separated CSV column names");
    cmd->add_option("--n", o.n, "number of tuples");
    cmd->add_option("--d", o.d, "number of attributes");
    cmd->add_option("--attr-bits", o.attr_bits, "attribute width in bits");
    cmd->add_option("--util-bits", o.util_bits, "utility width in bits");
    cmd->add_option("--seed", o.seed, "experiment seed");
    cmd->add_option("--backend", o.backend, "engine backend: collapsed, dense or gate");
    cmd->add_option("--retries", o.retries, "consecutive nulls accepted before terminating");
    cmd->add_option("--io-policy", o.io_policy, "IO counting: default or theorem");
    cmd->add_option("--grover-reads", o.grover_reads, "QRAM reads charged per iteration (1 or 2)");
    cmd->add_option("--page", o.page, "tuples per classical page");
}

qpq::IoPolicy make_policy(const CommonOpts& o) {
    qpq::IoPolicy p = o.io_policy == "theorem" ? qpq::IoPolicy::theorem_view()
                                               : qpq::IoPolicy::defaults();
    if (o.io_policy != "theorem" && o.io_policy != "default")
        throw CLI::ValidationError("--io-policy", "must be 'default' or 'theorem'");
    p.grover_reads_per_iteration = o.grover_reads;
    p.tuples_per_page = o.page;
    return p;
}

qpq::Dataset make_dataset(const CommonOpts& o) {
    if (!o.dataset_csv.empty()) {
        auto cols = split_list(o.columns);
        if (cols.empty()) throw CLI::ValidationError("--columns", "required with --dataset");
        return qpq::load_csv(o.dataset_csv, cols, o.attr_bits);
    }
    return qpq::generate_synthetic(qpq::category_from_string(o.category), o.n, o.d, o.seed,
                                   o.attr_bits);
}

void print_ledger(const qpq::IoLedger& led) {
    std::printf("  quantum_ios   %llu\n", (unsigned long long)led.quantum_reads);
    std::printf("  classical_ios %llu (reads %llu, writes %llu)\n",
                (unsigned long long)led.classical_total(), (unsigned long long)led.classical_reads,
                (unsigned long long)led.classical_writes);
    std::printf("  pq_ios        %.3f\n", led.pq_ops);
    std::printf("  total_ios     %.3f\n", led.total());
}

int cmd_gen(const CommonOpts& o, const std::string& out_path) {
    qpq::Dataset data = make_dataset(o);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    for (std::size_t j = 0; j < data.dims(); ++j) out << (j ? "," : "") << 'a' << j;
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto t = data.tuple(i);
        for (std::size_t j = 0; j < data.dims(); ++j) out << (j ? "," : "") << t[j];
        out << '\n';
    }
    std::printf("wrote %zu tuples x %zu attrs to %s\n", data.size(), data.dims(),
                out_path.c_str());
    return 0;
}

int cmd_query(const CommonOpts& o, const std::string& algo_name, std::size_t k,
              std::size_t theta_rank, const std::string& weights_csv) {
    qpq::Dataset data = make_dataset(o);
    const std::size_t n = data.size();

    qpq::UtilityFunction f = [&] {
        auto ws = split_list(weights_csv);
        if (ws.empty()) return qpq::random_query(data.dims(), o.seed, o.attr_bits, o.util_bits);
        std::vector<double> w;
        for (auto& s : ws) w.push_back(std::stod(s));
        return qpq::UtilityFunction::linear(std::move(w), o.attr_bits, o.util_bits);
    }();

    const std::size_t rank = std::min(theta_rank ? theta_rank : k, n);
    std::uint64_t theta = 0;
    qpq::Algo algo = qpq::algo_from_string(algo_name);
    if (qpq::algo_takes_theta(algo)) {
        std::vector<std::uint64_t> utils(n);
        for (std::size_t i = 0; i < n; ++i) utils[i] = f(data.tuple(i));
        std::nth_element(utils.begin(), utils.begin() + (rank - 1), utils.end(),
                         std::greater<>());
        theta = utils[rank - 1];
        std::printf("theta = %llu (utility rank %zu)\n", (unsigned long long)theta, rank);
    }

    qpq::QpqParams params{qpq::backend_from_string(o.backend), make_policy(o), o.retries};
    qpq::CounterRng rng(o.seed, 0x717279ull);
    qpq::IoLedger led;
    std::vector<std::pair<std::size_t, std::uint64_t>> items;
    std::string kind = "classical";
    std::size_t passes = 0;

    switch (algo) {
    case qpq::Algo::qqpq_theta: {
        qpq::Qram qram(data);
        auto out = qpq::qqpq_theta(qram, f, theta, rng, params);
        led = out.ledger;
        passes = out.passes;
        if (out.handle) {
            kind = "quantum";
            const auto& h = *out.handle;
            for (std::size_t i = 0; i < h.size(); ++i)
                items.emplace_back(h.indices()[i], h.utilities()[i]);
        } else {
            kind = "null";
        }
        break;
    }
    case qpq::Algo::cqpq_theta: {
        qpq::Qram qram(data);
        auto out = qpq::cqpq_theta(qram, f, theta, rng, params);
        led = out.ledger;
        passes = out.passes;
        items = out.items;
        break;
    }
    case qpq::Algo::cqpq_k: {
        qpq::Qram qram(data);
        auto out = qpq::cqpq_k(qram, f, k, rng, params);
        led = out.ledger;
        passes = out.passes;
        items = out.items;
        break;
    }
    case qpq::Algo::qqpq_k: {
        qpq::Qram qram(data);
        auto out = qpq::qqpq_k(qram, f, k, rng, params);
        led = out.ledger;
        passes = out.passes;
        if (out.handle) {
            kind = "quantum";
            const auto& h = *out.handle;
            for (std::size_t i = 0; i < h.size(); ++i)
                items.emplace_back(h.indices()[i], h.utilities()[i]);
        } else {
            kind = "null";
        }
        break;
    }
    case qpq::Algo::linear_scan:
        items = qpq::linear_scan(data, f, theta, led, params.policy);
        break;
    case qpq::Algo::quick_select:
        items = qpq::quick_select(data, f, k, led, rng, params.policy);
        break;
    }

    std::printf("%s on %s (N=%zu, d=%zu): %s result, %zu item(s), %zu passes\n",
                algo_name.c_str(), data.meta().name.c_str(), data.size(), data.dims(),
                kind.c_str(), items.size(), passes);
    for (std::size_t i = 0; i < items.size() && i < 10; ++i)
        std::printf("  #%zu  index %zu  utility %llu\n", i, items[i].first,
                    (unsigned long long)items[i].second);
    if (items.size() > 10) std::printf("  ... %zu more\n", items.size() - 10);
    print_ledger(led);
    return 0;
}

int cmd_bench(const CommonOpts& o, const std::string& sweep, const std::string& values,
              const std::string& algos, std::size_t queries, std::size_t k, unsigned threads,
              const std::string& out_path, const std::string& chart_path) {
    qpq::ExperimentConfig cfg;
    cfg.category = o.category;
    cfg.csv_path = o.dataset_csv;
    cfg.csv_columns = split_list(o.columns);
    cfg.n = o.n;
    cfg.dims = o.d;
    cfg.attr_bits = o.attr_bits;
    cfg.util_bits = o.util_bits;
    cfg.k = k;
    cfg.sweep = qpq::sweep_from_string(sweep);
    cfg.sweep_values = split_list(values);
    for (const auto& name : split_list(algos)) cfg.algorithms.push_back(qpq::algo_from_string(name));
    cfg.queries = queries;
    cfg.seed = o.seed;
    cfg.retries = o.retries;
    cfg.backend = qpq::backend_from_string(o.backend);
    cfg.policy = make_policy(o);
    cfg.threads = threads;

    auto rows = qpq::run_experiment(cfg);
    qpq::emit_csv(rows, out_path);
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    if (!chart_path.empty()) {
        qpq::emit_chart(rows, cfg.sweep, chart_path);
        std::printf("wrote chart to %s\n", chart_path.c_str());
    }

    // per-algorithm means, the numbers the chart plots
    std::vector<std::string> seen;
    for (const auto& r : rows) {
        std::string key = r.algorithm;
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
    }
    for (const auto& a : seen)
        std::printf("  mean total IOs %-12s %.1f\n", a.c_str(), qpq::mean_total_ios(rows, a));
    return 0;
}

int cmd_validate(const std::string& suite) {
    std::vector<qpq::CheckResult> results;
    if (suite == "all")
        results = qpq::validate_all();
    else if (suite == "backend-equivalence")
        results = qpq::validate_backend_equivalence();
    else if (suite == "amplitude-closed-form")
        results = qpq::validate_closed_form();
    else if (suite == "lemma1")
        results = qpq::validate_lemma1();
    else if (suite == "bounds")
        results = qpq::validate_bounds();
    else
        throw CLI::ValidationError("--suite", "unknown suite " + suite);

    bool all_ok = true;
    for (const auto& r : results) {
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all_ok = all_ok && r.passed;
    }
    return all_ok ? 0 : 1;
}

int cmd_bounds(const std::string& theorem, std::size_t n, std::size_t k) {
    auto print = [&](qpq::Theorem t) {
        std::printf("%s(N=%zu, k=%zu) = %.4f\n", qpq::to_string(t), n, k, qpq::bound(t, n, k));
    };
    if (theorem.empty()) {
        print(qpq::Theorem::t1);
        print(qpq::Theorem::t2);
        print(qpq::Theorem::t3);
    } else {
        print(qpq::theorem_from_string(theorem));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum preference query simulation lab"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override");

    CommonOpts common;

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
    add_common(gen, common);
    std::string gen_out = "dataset.csv";
    gen->add_option("--out", gen_out, "output CSV path");

    auto* query = app.add_subcommand("query", "run one query and print result plus IO ledger");
    add_common(query, common);
    std::string algo = "cqpq_k", weights;
    std::size_t k = 10, theta_rank = 0;
    query->add_option("--algo", algo, "algorithm name");
    query->add_option("--k", k, "result size k");
    query->add_option("--theta-rank", theta_rank, "threshold = this utility rank (default k)");
    query->add_option("--weights", weights, "explicit linear weights, comma-separated");

    auto* bench = app.add_subcommand("bench", "sweep experiments; emit CSV and SVG chart");
    add_common(bench, common);
    std::string sweep = "k", values = "10", algos, bench_out = "results.csv", chart;
    std::size_t queries = 100, bench_k = 10;
    unsigned threads = 1;
    bench->add_option("--sweep", sweep, "sweep variable: k, theta-rank, d, n or category");
    bench->add_option("--values", values, "comma-separated sweep values");
    bench->add_option("--algos,--algo", algos, "comma-separated algorithms (default per sweep)");
    bench->add_option("--queries", queries, "queries per sweep point");
    bench->add_option("--k", bench_k, "k (or theta rank) when not swept");
    bench->add_option("--threads", threads, "worker threads (0 = hardware)");
    bench->add_option("--out", bench_out, "output CSV path");
    bench->add_option("--chart", chart, "output SVG chart path");

    auto* validate = app.add_subcommand("validate", "run the cross-validation suites");
    std::string suite = "all";
    validate->add_option("--suite", suite,
                         "all, backend-equivalence, amplitude-closed-form, lemma1 or bounds");

    auto* bounds = app.add_subcommand("bounds", "print the closed-form IO bounds");
    std::string theorem;
    std::size_t bn = 500'000, bk = 10;
    bounds->add_option("--theorem", theorem, "T1, T2 or T3 (default all)");
    bounds->add_option("--n", bn, "dataset size N");
    bounds->add_option("--k", bk, "result size k");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen(common, gen_out);
        if (query->parsed()) return cmd_query(common, algo, k, theta_rank, weights);
        if (bench->parsed())
            return cmd_bench(common, sweep, values, algos, queries, bench_k, threads, bench_out,
                             chart);
        if (validate->parsed()) return cmd_validate(suite);
        if (bounds->parsed()) return cmd_bounds(theorem, bn, bk);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
