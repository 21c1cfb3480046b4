// Command-line front end: simulate, time-study, solver-study, gen-fields,
// validate-splitting. Every verb writes into a run directory that also holds
// the fully resolved configuration.

#include "unsatporo/studies.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace unsatporo;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> workers;
    bool no_timings = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("-c,--config", a.config, "JSON configuration (defaults when omitted)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-s,--seed", a.seed, "Overrides fields.seed");
    cmd->add_option("-o,--out", a.out, "Run directory (overrides output.directory)");
    cmd->add_option("-j,--workers", a.workers, "Concurrent runs")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-timings", a.no_timings, "Write zero timings for bit-stable outputs");
    cmd->add_flag("-q,--quiet", a.quiet, "No progress output");
}

ExperimentConfig resolve(const CommonArgs& a) {
    ExperimentConfig c = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
    if (a.seed) c.fields.gen.seed = *a.seed;
    if (!a.out.empty()) c.output.directory = a.out;
    if (a.workers) c.workers = *a.workers;
    if (a.no_timings) c.output.timings = false;
    c.validate();
    return c;
}

fs::path prepare_run_dir(const ExperimentConfig& c) {
    const fs::path dir(c.output.directory);
    fs::create_directories(dir);
    std::ofstream os(dir / "config.json");
    if (!os) throw std::runtime_error("cannot write " + (dir / "config.json").string());
    os << config_to_json(c).dump(2) << '\n';
    return dir;
}

LogFn logger(const CommonArgs& a) {
    if (a.quiet) return {};
    const auto start = std::chrono::steady_clock::now();
    return [start](const std::string& msg) {
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "[%8.2fs] %s\n", t, msg.c_str());
    };
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsaturated poroelasticity: time schemes and two-grid solver studies"};
    app.require_subcommand(1);

    CommonArgs sim_args, ts_args, ss_args, gf_args, vs_args;

    auto* sim = app.add_subcommand("simulate", "One transient with direct solves");
    add_common(sim, sim_args);
    std::string scheme = "ImEx";
    int sim_nt = 0;
    bool no_states = false;
    sim->add_option("--scheme", scheme, "Im, sIm or ImEx")->check(CLI::IsMember({"Im", "sIm", "ImEx"}));
    sim->add_option("--nt", sim_nt, "Time steps (default: first entry of time.N_t)");
    sim->add_flag("--no-states", no_states, "Skip per-step state CSVs");

    auto* ts = app.add_subcommand("time-study", "Im/sIm/ImEx errors against a fine implicit reference");
    add_common(ts, ts_args);

    auto* ss = app.add_subcommand("solver-study", "Two-grid iteration counts over the smoother grid");
    add_common(ss, ss_args);

    auto* gf = app.add_subcommand("gen-fields", "Write the heterogeneity fields of mesh.N as CSV");
    add_common(gf, gf_args);
    std::optional<int> gf_N;
    gf->add_option("-N,--grid", gf_N, "Fine cells per side (default mesh.N)")->check(CLI::PositiveNumber);

    auto* vs = app.add_subcommand("validate-splitting", "Bar-splitting dominance on sampled states");
    add_common(vs, vs_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            ExperimentConfig c = resolve(sim_args);
            const int nt = sim_nt > 0 ? sim_nt : c.time.N_t.front();
            const fs::path dir = prepare_run_dir(c);
            const SimulationResult r = simulate(c, parse_scheme(scheme), nt,
                                                no_states ? "" : (dir / "states").string(),
                                                logger(sim_args));
            write_step_reports(r.transient.reports, (dir / "steps.jsonl").string());
            write_results_csv({r.row}, (dir / "results.csv").string());
            write_results_json({r.row}, (dir / "results.json").string());
            if (!r.transient.completed) {
                std::fprintf(stderr, "run stopped at step %d\n", r.transient.failed_step);
                return 1;
            }
        } else if (*ts) {
            ExperimentConfig c = resolve(ts_args);
            const fs::path dir = prepare_run_dir(c);
            const TimeStudyResult r = run_time_scheme_study(c, logger(ts_args));
            write_results_csv(r.rows, (dir / "results.csv").string());
            write_results_json(r.rows, (dir / "results.json").string());
            write_picard_counts_csv(r.picard_counts, (dir / "picard_counts.csv").string());
        } else if (*ss) {
            ExperimentConfig c = resolve(ss_args);
            const fs::path dir = prepare_run_dir(c);
            const SolverStudyResult r = run_solver_study(c, logger(ss_args));
            write_results_csv(r.rows, (dir / "results.csv").string());
            write_results_json(r.rows, (dir / "results.json").string());
            write_counters_csv(r.counters, (dir / "counters.csv").string());
            std::string tables;
            for (const std::string& t : r.tables) tables += t + "\n";
            write_text(dir / "tables.txt", tables);
            if (!ss_args.quiet) std::cout << tables;
        } else if (*gf) {
            ExperimentConfig c = resolve(gf_args);
            const fs::path dir = prepare_run_dir(c);
            const StructuredTriMesh mesh(gf_N.value_or(c.mesh.N), c.mesh.L);
            const HeterogeneityFields f = fields_for(c, mesh);
            write_fields_csv(f, (dir / "fields.csv").string());
            if (!gf_args.quiet)
                std::fprintf(stderr, "%zu cells written to %s\n", f.k_s.size(),
                             (dir / "fields.csv").string().c_str());
        } else if (*vs) {
            ExperimentConfig c = resolve(vs_args);
            const fs::path dir = prepare_run_dir(c);
            const auto checks = validate_splitting(c, logger(vs_args));
            write_splitting_csv(checks, (dir / "splitting.csv").string());
            int failed = 0;
            for (const auto& s : checks) failed += s.pass ? 0 : 1;
            std::printf("%zu checks, %d failed\n", checks.size(), failed);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
