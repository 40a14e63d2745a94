// robustpi: solve robust models, generate benchmarks, run sweeps, build root-sum gadgets.

#include "robustpi/benchmarks.hpp"
#include "robustpi/diagnostics.hpp"
#include "robustpi/model_io.hpp"
#include "robustpi/reduction.hpp"
#include "robustpi/rmdp_pi.hpp"
#include "robustpi/sweep.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace robustpi;

namespace {

enum Exit { Ok = 0, Usage = 1, Validation = 2, Invariant = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Rational flag_rational(const std::string& text, const std::string& flag) {
    try {
        return parse_rational(text);
    } catch (const ModelError& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

Norm flag_norm(const std::string& text) {
    if (text == "l1")
        return Norm::l1();
    if (text == "linf")
        return Norm::linf();
    throw UsageError("--norm: expected l1 or linf, got '" + text + "'");
}

ImprovementMode flag_mode(const std::string& text) {
    if (text == "perpair")
        return ImprovementMode::PerPair;
    if (text == "batch")
        return ImprovementMode::BatchRmc;
    throw UsageError("--mode: expected perpair or batch, got '" + text + "'");
}

BenchmarkKind flag_kind(const std::string& text) {
    try {
        return parse_benchmark_kind(text);
    } catch (const ModelError& e) {
        throw UsageError(std::string("--kind: ") + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

void print_values(const ValueVector& v) {
    for (std::size_t s = 0; s < v.size(); ++s)
        std::cout << "value[" << s << "] = " << to_string(v[s]) << "  (" << to_decimal(v[s], 12) << ")\n";
}

void print_adversary(const std::vector<Row>& rows, const AdversaryPolicy& tau) {
    for (std::size_t s = 0; s < rows.size(); ++s) {
        std::cout << "adversary[" << s << "] =";
        for (std::size_t i = 0; i < rows[s].successors.size(); ++i)
            std::cout << " " << rows[s].successors[i] << ":" << to_string(tau[s][i]);
        std::cout << "\n";
    }
}

struct SolveOptions {
    std::string path;
    bool check = false;
    bool diagnostics = false;
    std::string mode = "perpair";
};

int cmd_solve(const SolveOptions& opt) {
    const ImprovementMode mode = flag_mode(opt.mode);
    const Rmdp model = load_model(opt.path);
    require_valid(model);

    ValueVector v;
    ValueVector bellman;
    DiagnosticReport report;
    std::cout << "states: " << model.n_states() << "\nactions: " << model.n_actions
              << "\ndiscount: " << to_string(model.discount) << "\n";
    if (model.n_actions == 1) {
        const Rmc chain = to_rmc(model);
        const RmcSolveTrace t = rmc_policy_iteration(chain);
        std::cout << "iterations: " << t.iterations << "\n";
        print_values(t.v_star);
        print_adversary(chain.rows, t.tau_star);
        v = t.v_star;
        if (opt.check)
            bellman = apply_bellman(chain, v);
        if (opt.diagnostics)
            report = verify_trace(chain, t);
    } else {
        const RmdpSolveTrace t = rmdp_policy_iteration(model, std::nullopt, mode);
        std::cout << "outer-iterations: " << t.outer_iterations << "\npolicy-changes: " << t.policy_changes()
                  << "\ninner-iterations: " << t.inner_iterations_total << "\n";
        print_values(t.v_star);
        std::cout << "policy:";
        for (auto a : t.sigma_star)
            std::cout << " " << a;
        std::cout << "\n";
        print_adversary(induce_rmc(model, t.sigma_star).rows, t.tau_star);
        v = t.v_star;
        if (opt.check)
            bellman = apply_bellman(model, v);
        if (opt.diagnostics) {
            report = verify_rmdp_trace(model, t);
            for (std::size_t i = 0; i < t.inner.size(); ++i)
                report.append(verify_trace(induce_rmc(model, t.policies[i]), t.inner[i]),
                              "outer" + std::to_string(i) + "/");
        }
    }

    int code = Ok;
    if (opt.check) {
        if (bellman == v) {
            std::cout << "fixed-point: exact\n";
        } else {
            std::cout << "fixed-point: VIOLATED (sup gap " << to_string(sup_distance(bellman, v)) << ")\n";
            code = Invariant;
        }
    }
    if (opt.diagnostics) {
        std::cout << "# iter, check, status, witness(s,i), lhs, rhs\n" << report.to_text();
        std::cout << "diagnostics: " << report.violations() << " violations, " << report.events.size()
                  << " halving events\n";
        if (report.violations() > 0)
            code = Invariant;
    }
    return code;
}

struct BenchOptions {
    std::string kind = "gridworld";
    std::size_t size = 16;
    std::uint64_t seed = 0;
    std::string gamma = "1/2";
    std::string delta = "0";
    std::string norm = "l1";
    std::string output;
};

int cmd_bench(const BenchOptions& opt) {
    BenchmarkSpec spec;
    spec.kind = flag_kind(opt.kind);
    spec.size = opt.size;
    spec.seed = opt.seed;
    spec.discount = flag_rational(opt.gamma, "--gamma");
    spec.radius = flag_rational(opt.delta, "--delta");
    spec.norm = flag_norm(opt.norm);
    const Rmdp model = make_benchmark(spec);
    require_valid(model);
    write_text(opt.output, serialize_model(model));
    return Ok;
}

struct SweepOptions {
    std::vector<std::string> kinds{"gridworld", "inventory", "machine", "garnet", "longchain"};
    std::vector<std::size_t> sizes{4, 16, 64};
    std::vector<std::string> gammas{"1/2"};
    std::vector<std::string> deltas{"1/20"};
    std::vector<std::string> norms{"l1", "linf"};
    std::uint64_t seed = 0;
    std::string mode = "perpair";
    std::string output;
    bool no_runtime = false;
    std::size_t threads = 0;
};

int cmd_sweep(const SweepOptions& opt) {
    SweepConfig config;
    for (const auto& k : opt.kinds)
        config.kinds.push_back(flag_kind(k));
    config.sizes = opt.sizes;
    config.discounts.clear();
    for (const auto& g : opt.gammas)
        config.discounts.push_back(flag_rational(g, "--gamma"));
    config.radii.clear();
    for (const auto& d : opt.deltas)
        config.radii.push_back(flag_rational(d, "--delta"));
    config.norms.clear();
    for (const auto& n : opt.norms)
        config.norms.push_back(flag_norm(n));
    config.seed = opt.seed;
    config.mode = flag_mode(opt.mode);
    config.threads = opt.threads;

    const auto rows = run_sweep(config);
    std::ostringstream csv;
    write_sweep_csv(csv, rows, !opt.no_runtime);
    write_text(opt.output, csv.str());
    int code = Ok;
    for (const auto& r : rows) {
        if (r.outer_iterations > r.bound) {
            std::cerr << "bound exceeded: " << to_string(r.kind) << " n=" << r.n << "\n";
            code = Invariant;
        }
    }
    return code;
}

struct GadgetOptions {
    std::vector<std::string> a;
    std::string alpha;
    unsigned long p = 2;
    std::string gamma = "1/2";
    unsigned long precision = 64;
    std::string output;
};

int cmd_gadget(const GadgetOptions& opt) {
    std::vector<Integer> a;
    for (const auto& text : opt.a) {
        Integer x;
        if (x.set_str(text, 10) != 0)
            throw UsageError("--a: '" + text + "' is not an integer");
        a.push_back(x);
    }
    Integer alpha;
    if (alpha.set_str(opt.alpha, 10) != 0)
        throw UsageError("--alpha: '" + opt.alpha + "' is not an integer");
    if (opt.precision < 16)
        throw UsageError("--precision must be at least 16");
    const Rational gamma = flag_rational(opt.gamma, "--gamma");

    const GadgetInstance g = build_root_sum_gadget(a, alpha, opt.p, gamma);
    require_valid(g.chain);
    if (!opt.output.empty())
        write_text(opt.output, serialize_model(g.chain));
    const RationalInterval value = gadget_closed_form_value(g, opt.precision);
    std::cout << "states: " << g.chain.n_states() << "\nM*: " << g.m_star << "\ndelta: " << to_string(g.delta)
              << "\nK: " << g.K.get_str() << "\nlambda: " << to_string(g.lambda) << "  ("
              << to_decimal(g.lambda, 12) << ")\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::cout << "decomposition[" << i << "]: " << g.x[i].get_str() << " =";
        for (const auto& u : g.terms[i])
            std::cout << " " << u.get_str() << "^" << opt.p;
        std::cout << "\n";
    }
    if (value.exact())
        std::cout << "value: " << to_string(value.lo) << " (exact)\n";
    else
        std::cout << "value: [" << to_decimal(value.lo, 12) << ", " << to_decimal(value.hi, 12) << "]\n";
    std::cout << "decision: " << to_string(decide_gadget(g, opt.precision)) << "\n";
    std::cout << "direct: " << to_string(decide_root_sum(a, alpha, opt.p, opt.precision)) << "\n";
    return Ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact policy iteration for robust Markov chains and decision processes"};
    app.require_subcommand(1);

    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "Solve a model file exactly");
    s->add_option("model", solve.path, "Model file (JSON)")->required();
    s->add_flag("--check", solve.check, "Verify the Bellman fixed point exactly");
    s->add_flag("--diagnostics", solve.diagnostics, "Check every iterate against the convergence bounds");
    s->add_option("--mode", solve.mode, "Improvement mode: perpair or batch")->capture_default_str();

    BenchOptions bench;
    auto* b = app.add_subcommand("bench", "Write a benchmark model file");
    b->add_option("--kind", bench.kind, "gridworld, inventory, machine, garnet or longchain")->capture_default_str();
    b->add_option("--size", bench.size, "Requested number of states")->capture_default_str();
    b->add_option("--seed", bench.seed, "Seed (garnet)")->capture_default_str();
    b->add_option("--gamma", bench.gamma, "Discount a/b")->capture_default_str();
    b->add_option("--delta", bench.delta, "Radius a/b")->capture_default_str();
    b->add_option("--norm", bench.norm, "l1 or linf")->capture_default_str();
    b->add_option("--output", bench.output, "Output path (default stdout)");

    SweepOptions sweep;
    auto* w = app.add_subcommand("sweep", "Solve a benchmark grid and write CSV");
    w->add_option("--kind,--kinds", sweep.kinds, "Benchmark kinds")->delimiter(',')->capture_default_str();
    w->add_option("--sizes", sweep.sizes, "Requested state counts")->delimiter(',')->capture_default_str();
    w->add_option("--gamma", sweep.gammas, "Discounts a/b")->delimiter(',')->capture_default_str();
    w->add_option("--delta", sweep.deltas, "Radii a/b")->delimiter(',')->capture_default_str();
    w->add_option("--norm", sweep.norms, "Norms")->delimiter(',')->capture_default_str();
    w->add_option("--seed", sweep.seed, "Seed (garnet)")->capture_default_str();
    w->add_option("--mode", sweep.mode, "Improvement mode: perpair or batch")->capture_default_str();
    w->add_option("--threads", sweep.threads, "Worker cap (default: ROBUSTPI_THREADS or all cores)");
    w->add_option("--output", sweep.output, "CSV path (default stdout)");
    w->add_flag("--no-runtime", sweep.no_runtime, "Write 0 in runtime_ms for byte-stable output");

    GadgetOptions gadget;
    auto* g = app.add_subcommand("gadget", "Build the root-sum gadget chain and decide it");
    g->add_option("--a", gadget.a, "Positive integers a_i")->delimiter(',')->required();
    g->add_option("--alpha", gadget.alpha, "Integer threshold")->required();
    g->add_option("--p", gadget.p, "Exponent p >= 2")->capture_default_str();
    g->add_option("--gamma", gadget.gamma, "Discount a/b")->capture_default_str();
    g->add_option("--precision", gadget.precision, "Bits per root enclosure")->capture_default_str();
    g->add_option("--output", gadget.output, "Write the chain as a model file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Usage;
    }

    try {
        if (*s)
            return cmd_solve(solve);
        if (*b)
            return cmd_bench(bench);
        if (*w)
            return cmd_sweep(sweep);
        if (*g)
            return cmd_gadget(gadget);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const InvariantViolation& e) {
        std::cerr << "internal invariant violated: " << e.what() << "\n";
        return Invariant;
    } catch (const UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return Validation;
    } catch (const ModelError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return Validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Validation;
    }
    return Usage;
}
