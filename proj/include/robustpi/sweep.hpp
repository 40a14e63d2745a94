#pragma once

#include "robustpi/benchmarks.hpp"
#include "robustpi/rational.hpp"
#include "robustpi/rmdp_pi.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace robustpi {

struct SweepRow {
    BenchmarkKind kind = BenchmarkKind::Gridworld;
    Norm norm = Norm::l1();
    Rational discount;
    Rational radius;
    std::size_t n = 0; ///< actual state count of the generated model
    std::size_t outer_iterations = 0;
    std::size_t inner_iterations_total = 0;
    std::size_t bound = 0;
    double runtime_ms = 0;
};

struct SweepConfig {
    std::vector<BenchmarkKind> kinds;
    std::vector<std::size_t> sizes;
    std::vector<Rational> discounts{Rational(1, 2)};
    std::vector<Rational> radii{Rational(1, 20)};
    std::vector<Norm> norms{Norm::l1(), Norm::linf()};
    std::uint64_t seed = 0;
    ImprovementMode mode = ImprovementMode::PerPair;
    std::size_t threads = 0; ///< 0: ROBUSTPI_THREADS, else hardware concurrency
};

/// Worker count: explicit request, then ROBUSTPI_THREADS, then the hardware, never above `jobs`.
inline std::size_t sweep_threads(std::size_t requested, std::size_t jobs) {
    std::size_t t = requested;
    if (t == 0) {
        if (const char* env = std::getenv("ROBUSTPI_THREADS")) {
            char* end = nullptr;
            const unsigned long parsed = std::strtoul(env, &end, 10);
            if (end != env && *end == '\0' && parsed > 0)
                t = parsed;
        }
    }
    if (t == 0)
        t = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(t, jobs));
}

inline SweepRow run_instance(const BenchmarkSpec& spec, ImprovementMode mode) {
    const auto start = std::chrono::steady_clock::now();
    const Rmdp model = make_benchmark(spec);
    const RmdpSolveTrace trace = rmdp_policy_iteration(model, benchmark_initial_policy(spec.kind, model), mode);
    const auto stop = std::chrono::steady_clock::now();
    SweepRow row;
    row.kind = spec.kind;
    row.norm = spec.norm;
    row.discount = spec.discount;
    row.radius = spec.radius;
    row.n = model.n_states();
    row.outer_iterations = trace.outer_iterations;
    row.inner_iterations_total = trace.inner_iterations_total;
    row.bound = rmdp_iteration_bound(model.n_states(), model.n_actions, model.discount);
    row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return row;
}

/// Rows ordered by kind name, norm name, discount, radius, then n.
inline bool sweep_row_less(const SweepRow& a, const SweepRow& b) {
    const std::string ka = to_string(a.kind), kb = to_string(b.kind);
    const std::string na = to_string(a.norm), nb = to_string(b.norm);
    if (ka != kb)
        return ka < kb;
    if (na != nb)
        return na < nb;
    if (a.discount != b.discount)
        return a.discount < b.discount;
    if (a.radius != b.radius)
        return a.radius < b.radius;
    return a.n < b.n;
}

/// Solves every grid cell (possibly in parallel) and returns the rows sorted.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config) {
    std::vector<BenchmarkSpec> jobs;
    for (auto kind : config.kinds)
        for (const auto& norm : config.norms)
            for (const auto& gamma : config.discounts)
                for (const auto& delta : config.radii)
                    for (auto size : config.sizes) {
                        BenchmarkSpec spec;
                        spec.kind = kind;
                        spec.size = size;
                        spec.seed = config.seed;
                        spec.discount = gamma;
                        spec.radius = delta;
                        spec.norm = norm;
                        jobs.push_back(spec);
                    }

    std::vector<SweepRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                rows[i] = run_instance(jobs[i], config.mode);
            } catch (...) {
                std::lock_guard<std::mutex> guard(failure_lock);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const std::size_t t = sweep_threads(config.threads, jobs.size());
    if (t <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < t; ++k)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    std::stable_sort(rows.begin(), rows.end(), sweep_row_less);
    return rows;
}

inline const char* sweep_csv_header() {
    return "benchmark,norm,gamma,delta,n,outer_iters,inner_iters_total,bound,runtime_ms,gamma_exact,delta_exact";
}

/// CSV with 12-significant-digit decimals plus exact num/den columns.
/// Without runtime the runtime column is written as 0 so files compare byte for byte.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_runtime = true) {
    out << sweep_csv_header() << "\n";
    for (const auto& r : rows) {
        std::string ms = "0";
        if (with_runtime) {
            Rational q(static_cast<long>(r.runtime_ms * 1000.0 + 0.5), 1000L);
            q.canonicalize();
            ms = to_decimal(q, 12);
        }
        out << to_string(r.kind) << "," << to_string(r.norm) << "," << to_decimal(r.discount, 12) << ","
            << to_decimal(r.radius, 12) << "," << r.n << "," << r.outer_iterations << ","
            << r.inner_iterations_total << "," << r.bound << "," << ms << "," << to_string(r.discount) << ","
            << to_string(r.radius) << "\n";
    }
}

} // namespace robustpi
