#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "nasdag/analysis.hpp"
#include "nasdag/fork_replay.hpp"
#include "nasdag/netsim.hpp"
#include "nasdag/scenario.hpp"

namespace fs = std::filesystem;
using namespace nasdag;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> periods;
    std::string out;
    unsigned runs = 1;
    unsigned parallel = 1;
    bool dump_graph = false;
};

fs::path resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("NASDAG_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "out";
}

int run_one(ScenarioConfig cfg, const fs::path& dir, bool dump_graph, std::mutex& io) {
    fs::create_directories(dir);
    Simulation sim(cfg);
    sim.run();
    auto report = sim.report();
    write_file(dir / "report.json", report.to_json());
    write_file(dir / "timeseries.csv", report.timeseries_csv());
    write_file(dir / "ledger.csv", report.ledger_csv());
    if (dump_graph) write_file(dir / "compat.dot", sim.honest(0).compat().to_dot(sim.honest(0).graph()));
    std::lock_guard lock(io);
    std::cout << cfg.name << " seed=" << cfg.seed << " liveness=" << report.liveness
              << " safe=" << (report.audits.safe() ? "yes" : "no")
              << " converged=" << (report.audits.converged ? "yes" : "no") << " digest=" << report.digest().hex()
              << " -> " << dir.string() << '\n';
    return report.audits.safe() ? 0 : 3;
}

int cmd_simulate(const SimulateArgs& a) {
    ScenarioConfig cfg = load_scenario(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.periods) {
        cfg.periods = *a.periods;
        cfg.validate();
    }
    const fs::path root = resolve_out_dir(a.out);
    std::mutex io;
    if (a.runs <= 1) return run_one(cfg, root, a.dump_graph, io);

    std::atomic<unsigned> next{0};
    std::atomic<int> status{0};
    auto worker = [&] {
        for (unsigned k = next++; k < a.runs; k = next++) {
            ScenarioConfig c = cfg;
            c.seed = cfg.seed + k;
            try {
                const int rc = run_one(c, root / ("seed-" + std::to_string(c.seed)), a.dump_graph, io);
                if (rc != 0) status = rc;
            } catch (const std::exception& e) {
                std::lock_guard lock(io);
                std::cerr << "seed " << c.seed << ": " << e.what() << '\n';
                status = 1;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < std::max(1u, a.parallel); ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return status;
}

struct GridArgs {
    std::uint32_t e_min = 32;
    std::uint32_t e_max = 160;
    std::uint32_t e_step = 8;
    std::uint32_t q_steps = 12;
    std::string beta = "1/3";
    double rate = 2.0;
    std::string out;
};

int cmd_safety_grid(const GridArgs& a) {
    if (a.e_min == 0 || a.e_max < a.e_min || a.e_step == 0 || a.q_steps == 0)
        throw std::invalid_argument("bad grid range");
    std::vector<std::uint32_t> es;
    for (std::uint32_t e = a.e_min; e <= a.e_max; e += a.e_step) es.push_back(e);
    std::vector<analysis::Rational> qs;
    for (std::uint32_t i = 0; i <= a.q_steps; ++i) qs.emplace_back(analysis::Rational(i, a.q_steps));
    const auto cells = analysis::safety_grid(es, qs, analysis::parse_rational(a.beta), a.rate);
    const auto csv = analysis::grid_csv(cells);
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        write_file(a.out, csv);
    }
    return 0;
}

struct ForkArgs {
    ForkReplayOptions opts;
    std::string out;
};

int cmd_replay_fork_attack(const ForkArgs& a) {
    const auto r = replay_fork_attack(a.opts);
    const auto trace = r.trace();
    if (a.out.empty()) {
        std::cout << trace;
    } else {
        write_file(a.out, trace);
        std::cout << "trace -> " << a.out << '\n';
    }
    if (auto d = r.periods_to_final()) {
        if (*d < 0)
            std::cout << "b_i final " << -*d << " periods before the second certificate\n";
        else
            std::cout << "b_i final " << *d << " periods after the second certificate\n";
    }
    return r.outcome_ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nasdag: block-DAG proof-of-stake simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run one scenario and write report.json, timeseries.csv, ledger.csv");
    s->add_option("--config", sim.config, "Scenario YAML")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", sim.seed, "Override the scenario seed");
    s->add_option("--out", sim.out, "Output directory (default $NASDAG_OUT_DIR or ./out)");
    s->add_option("--periods", sim.periods, "Override the number of periods");
    s->add_option("--runs", sim.runs, "Consecutive seeds to run, one subdirectory each")->check(CLI::PositiveNumber);
    s->add_option("--parallel", sim.parallel, "Worker threads for multi-seed runs")->check(CLI::PositiveNumber);
    s->add_flag("--dump-graph", sim.dump_graph, "Also write node 0's compatibility graph as DOT");

    GridArgs grid;
    auto* g = app.add_subcommand("safety-grid", "Exact attacker-capture probabilities over E and Q");
    g->add_option("--e-min", grid.e_min);
    g->add_option("--e-max", grid.e_max);
    g->add_option("--e-step", grid.e_step);
    g->add_option("--q-steps", grid.q_steps, "Q runs over i/q_steps");
    g->add_option("--beta", grid.beta, "Attacker stake share, e.g. 1/3");
    g->add_option("--rate", grid.rate, "Slots per second");
    g->add_option("--out", grid.out, "CSV path (default stdout)");

    ForkArgs fork;
    auto* f = app.add_subcommand("replay-fork-attack", "Replay the three-frame fork attack and check its outcome");
    f->add_option("--beta", fork.opts.beta);
    f->add_option("--delta-f", fork.opts.delta_f);
    f->add_option("--seed", fork.opts.seed);
    f->add_option("--out", fork.out, "Trace path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*s) return cmd_simulate(sim);
        if (*g) return cmd_safety_grid(grid);
        if (*f) return cmd_replay_fork_attack(fork);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
