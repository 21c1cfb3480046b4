#include "unsatporo/studies.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace unsatporo {

namespace {

void say(const LogFn& log, const std::string& msg) {
    if (log) log(msg);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    return os;
}

bool is_pointwise(const std::string& smoother) { return smoother == "Jacobi" || smoother == "GS"; }

std::string experiment_for_steps(int N_t) { return "time-study:Nt=" + std::to_string(N_t); }

double mean_of(const std::vector<int>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (int x : v) s += x;
    return s / static_cast<double>(v.size());
}

SpectralBasis basis_for(const ExperimentConfig& c, const Problem& problem, const CoarseGrid& coarse,
                        int count, const LogFn& log) {
    const int N = problem.disc.mesh().N();
    const std::uint64_t key = basis_key(problem.bounds, N, c.mesh.N_H, count, count);
    std::string path;
    if (!c.solver.basis_cache.empty()) {
        std::filesystem::create_directories(c.solver.basis_cache);
        char name[64];
        std::snprintf(name, sizeof name, "basis_%016llx.bin", static_cast<unsigned long long>(key));
        path = (std::filesystem::path(c.solver.basis_cache) / name).string();
        SpectralBasis cached;
        if (load_basis(path, key, cached)) {
            say(log, "basis " + grid_label(N) + " loaded from " + path);
            return cached;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    SpectralBasis basis = compute_spectral_basis(problem.disc.mesh(), coarse, problem.bounds, count, count);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char msg[96];
    std::snprintf(msg, sizeof msg, "basis %s M<=%d computed in %.2fs", grid_label(N).c_str(), count, dt);
    say(log, msg);
    if (!path.empty()) save_basis(basis, key, path);
    return basis;
}

}  // namespace

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::clamp(workers, 1, std::max(1, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string grid_label(int N) { return std::to_string(N) + "x" + std::to_string(N); }

MaterialModel material_from_config(const ExperimentConfig& c, const HeterogeneityFields& f) {
    MaterialModel m;
    m.vg = c.vg;
    m.elastic = c.elastic;
    m.fluid = c.fluid;
    m.fluid.k_s = f.k_s;
    m.elastic.E_d = f.E_d;
    m.elastic.E_w = f.E_w;
    m.frozen_pressure = c.frozen_pressure;
    return m;
}

HeterogeneityFields fields_for(const ExperimentConfig& c, const StructuredTriMesh& mesh) {
    if (c.fields.file.empty()) return generate_fields(mesh, c.fields.gen);
    HeterogeneityFields f = read_fields_csv(c.fields.file);
    if (static_cast<int>(f.k_s.size()) != mesh.n_triangles())
        throw ConfigError("field file " + c.fields.file + " has " + std::to_string(f.k_s.size()) +
                          " cells, mesh " + grid_label(mesh.N()) + " has " +
                          std::to_string(mesh.n_triangles()));
    return f;
}

Problem make_problem(const ExperimentConfig& c, int N) {
    StructuredTriMesh mesh(N, c.mesh.L);
    HeterogeneityFields fields = fields_for(c, mesh);
    MaterialModel material = material_from_config(c, fields);
    CoefficientBounds bounds = coefficient_bounds(c.p_min(), c.p_max(), c.bounds.samples, material);
    Discretization disc(std::move(mesh), std::move(material), c.boundary, c.source);
    State initial = initial_state(disc, c.initial.p0, c.initial.compatible_boundary);
    return Problem{std::move(disc), std::move(fields), std::move(bounds), std::move(initial)};
}

TransientOptions transient_options(const ExperimentConfig& c, const Problem& problem,
                                   SchemeKind scheme, int N_t) {
    TransientOptions o;
    o.scheme = scheme;
    o.time.T_max = c.time.T_max;
    o.time.N_t = N_t;
    o.picard = c.picard;
    o.mechanics_form = c.imex.mechanics_form;
    o.warm_start = c.imex.warm_start;
    o.reset_history_after_bootstrap = c.imex.reset_history_after_bootstrap;
    o.store_trajectory = false;
    o.bounds = &problem.bounds;
    return o;
}

TimeStudyResult run_time_scheme_study(const ExperimentConfig& c, const LogFn& log) {
    c.validate();
    const Problem base = make_problem(c, c.mesh.N);
    const std::string grid = grid_label(c.mesh.N);

    say(log, "reference Im N_t=" + std::to_string(c.time.reference_N_t));
    TransientOptions ro = transient_options(c, base, SchemeKind::implicit_picard, c.time.reference_N_t);
    const TransientResult reference = run_transient(base.disc, base.initial, ro);
    if (!reference.completed) throw std::runtime_error("time-study: reference run did not complete");

    struct Job {
        SchemeKind scheme;
        int N_t;
    };
    std::vector<Job> jobs;
    for (SchemeKind s : c.schemes)
        for (int nt : c.time.N_t) jobs.push_back({s, nt});

    TimeStudyResult out;
    out.reference_N_t = c.time.reference_N_t;
    out.rows.resize(jobs.size());
    std::vector<std::vector<PicardCount>> counts(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), c.workers, [&](int i) {
        const Job& job = jobs[i];
        // Each job owns its discretization: assembly counters are not shared.
        const Problem problem = c.workers > 1 ? make_problem(c, c.mesh.N) : Problem{base};
        TransientOptions o = transient_options(c, problem, job.scheme, job.N_t);
        const TransientResult r = run_transient(problem.disc, problem.initial, o);
        if (!r.completed)
            throw std::runtime_error(std::string("time-study: ") + scheme_name(job.scheme) +
                                     " N_t=" + std::to_string(job.N_t) + " did not complete");
        ResultRow row;
        row.experiment = experiment_for_steps(job.N_t);
        row.grid = grid;
        row.scheme = scheme_name(job.scheme);
        row.smoother = "direct";
        row.colors = 0;
        row.sweeps = 0;
        row.M = 0;
        std::vector<int> solves;
        for (const StepReport& rep : r.reports) {
            const int k = job.scheme == SchemeKind::implicit_picard ? rep.picard_iterations : 1;
            solves.push_back(k);
            if (job.scheme == SchemeKind::implicit_picard)
                counts[i].push_back({job.N_t, rep.step, rep.picard_iterations});
        }
        row.iters_mean = mean_of(solves);
        row.solve_s = c.output.timings ? r.solve_seconds : 0.0;
        row.total_s = c.output.timings ? r.total_seconds : 0.0;
        row.e_p = relative_error(r.final_state.p, reference.final_state.p);
        row.e_u = relative_error(r.final_state.u, reference.final_state.u);
        out.rows[i] = std::move(row);
        char msg[128];
        std::snprintf(msg, sizeof msg, "%s N_t=%d e_p=%.4e e_u=%.4e", scheme_name(job.scheme),
                      job.N_t, out.rows[i].e_p, out.rows[i].e_u);
        say(log, msg);
    });
    for (auto& v : counts) out.picard_counts.insert(out.picard_counts.end(), v.begin(), v.end());
    sort_rows(out.rows);
    return out;
}

void write_picard_counts_csv(const std::vector<PicardCount>& counts, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "N_t,step,picard_iterations\n";
    for (const PicardCount& p : counts) os << p.N_t << ',' << p.step << ',' << p.iterations << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

std::vector<SolverCell> solver_cells(const SolverGridConfig& s) {
    std::vector<SolverCell> cells;
    for (int N : s.grids)
        for (const std::string& sm : s.smoothers)
            for (int colors : is_pointwise(sm) ? std::vector<int>{1} : s.colors)
                for (int sweeps : s.sweeps)
                    for (int M : s.M) cells.push_back({N, sm, colors, sweeps, M});
    return cells;
}

SolverStudyResult run_solver_study(const ExperimentConfig& c, const LogFn& log) {
    c.validate();
    const SolverGridConfig& sg = c.solver;
    const int steps = sg.steps > 0 ? std::min(sg.steps, sg.N_t) : sg.N_t;
    const double T = c.time.T_max * steps / sg.N_t;
    const std::vector<SolverCell> cells = solver_cells(sg);
    const int max_M = *std::max_element(sg.M.begin(), sg.M.end());

    SolverStudyResult out;
    out.rows.resize(cells.size());
    out.counters.resize(cells.size());
    for (int N : sg.grids) {
        const Problem base = make_problem(c, N);
        const CoarseGrid coarse(base.disc.mesh(), c.mesh.N_H);
        const SpectralBasis basis = basis_for(c, base, coarse, max_M, log);

        TransientOptions direct = transient_options(c, base, SchemeKind::imex, steps);
        direct.time.T_max = T;
        const TransientResult ref = run_transient(base.disc, base.initial, direct);

        std::vector<int> mine;
        for (int i = 0; i < static_cast<int>(cells.size()); ++i)
            if (cells[i].N == N) mine.push_back(i);

        parallel_for(static_cast<int>(mine.size()), c.workers, [&](int k) {
            const int i = mine[k];
            const SolverCell& cell = cells[i];
            const Problem problem = c.workers > 1 ? make_problem(c, N) : Problem{base};

            TwoGridConfig tg;
            tg.smoother = SmootherConfig::from_label(cell.smoother);
            tg.smoother.colors = cell.colors;
            tg.smoother.sweeps = cell.sweeps;
            tg.smoother.jacobi_damping = sg.jacobi_damping;
            tg.count_p = cell.M;
            tg.count_u = cell.M;
            tg.N_H = c.mesh.N_H;
            tg.close_clusters = sg.close_clusters;
            tg.rel_tol = sg.rel_tol;
            tg.max_iters = sg.max_iters;
            tg.norm = sg.norm;
            tg.reference = sg.reference;

            TransientOptions o = transient_options(c, problem, SchemeKind::imex, steps);
            o.time.T_max = T;
            const Discretization& disc = problem.disc;
            o.imex_solver = [&](SparseMatrix L) -> std::unique_ptr<FixedSystemSolver> {
                return build_two_grid(std::move(L), disc.mesh(), disc.dofs(), coarse, basis, tg);
            };
            const TransientResult r = run_transient(disc, problem.initial, o);

            CellCounters& cc = out.counters[i];
            cc.cell = cell;
            cc.imex_matrix_assemblies = r.imex_matrix_assemblies;
            cc.coarse_factorizations = r.coarse_factorizations;
            cc.vanka_setups = r.vanka_setups;
            cc.imex_solver_setups = r.imex_solver_setups;
            // Step one is the semi-implicit bootstrap with a direct solve.
            for (std::size_t s = 1; s < r.reports.size(); ++s)
                cc.iterations.push_back(r.reports[s].solver_iterations);

            ResultRow row;
            row.experiment = "solver-study";
            row.grid = grid_label(N);
            row.scheme = "ImEx";
            row.smoother = cell.smoother;
            row.colors = cell.colors;
            row.sweeps = cell.sweeps;
            row.M = cell.M;
            row.converged = r.completed;
            row.iters_cap = sg.max_iters;
            row.iters_mean = r.completed ? mean_of(cc.iterations) : 0.0;
            row.solve_s = c.output.timings ? r.solve_seconds : 0.0;
            row.total_s = c.output.timings ? r.total_seconds : 0.0;
            if (r.completed) {
                row.e_p = relative_error(r.final_state.p, ref.final_state.p);
                row.e_u = relative_error(r.final_state.u, ref.final_state.u);
            }
            char msg[160];
            if (r.completed)
                std::snprintf(msg, sizeof msg, "%s %s/%dc sweeps=%d M=%d iters=%.2f", row.grid.c_str(),
                              cell.smoother.c_str(), cell.colors, cell.sweeps, cell.M, row.iters_mean);
            else
                std::snprintf(msg, sizeof msg, "%s %s/%dc sweeps=%d M=%d >%d", row.grid.c_str(),
                              cell.smoother.c_str(), cell.colors, cell.sweeps, cell.M, sg.max_iters);
            say(log, msg);
            out.rows[i] = std::move(row);
        });
    }

    std::vector<int> order(cells.size());
    for (int i = 0; i < static_cast<int>(order.size()); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return row_less(out.rows[a], out.rows[b]); });
    std::vector<ResultRow> rows;
    std::vector<CellCounters> counters;
    for (int i : order) {
        rows.push_back(std::move(out.rows[i]));
        counters.push_back(std::move(out.counters[i]));
    }
    out.rows = std::move(rows);
    out.counters = std::move(counters);
    for (int N : sg.grids) out.tables.push_back(format_solver_table(out.rows, grid_label(N)));
    return out;
}

void write_counters_csv(const std::vector<CellCounters>& counters, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "experiment,grid,smoother,colors,sweeps,M,imex_matrix_assemblies,coarse_factorizations,"
          "vanka_setups,imex_solver_setups\n";
    for (const CellCounters& c : counters)
        os << "solver-study," << grid_label(c.cell.N) << ',' << c.cell.smoother << ','
           << c.cell.colors << ',' << c.cell.sweeps << ',' << c.cell.M << ','
           << c.imex_matrix_assemblies << ',' << c.coarse_factorizations << ',' << c.vanka_setups
           << ',' << c.imex_solver_setups << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

std::vector<SplittingCheck> validate_splitting(const ExperimentConfig& c, const LogFn& log) {
    c.validate();
    const SplittingConfig& sc = c.splitting;
    const Problem problem = make_problem(c, sc.N);
    TransientOptions o = transient_options(c, problem, SchemeKind::semi_implicit, sc.N_t);
    o.store_trajectory = true;
    const TransientResult r = run_transient(problem.disc, problem.initial, o);
    const int n_states = static_cast<int>(r.trajectory.size());
    const int samples = std::min(sc.states, n_states);

    const SplitOperators split(problem.disc, problem.bounds, c.time.T_max / sc.N_t);
    std::vector<SplittingCheck> checks;
    for (int k = 0; k < samples; ++k) {
        // Evenly spaced, always including the final state.
        const int idx = samples == 1 ? n_states - 1
                                     : static_cast<int>(std::lround(
                                           static_cast<double>(k) * (n_states - 1) / (samples - 1)));
        const AssembledOperators nl = split.residual_at(r.trajectory[idx].p);
        const AssembledOperators& lin = split.linear();
        const std::pair<const char*, std::pair<const SparseMatrix*, const SparseMatrix*>> blocks[] = {
            {"M", {&lin.M, &nl.M}}, {"A", {&lin.A, &nl.A}}, {"K", {&lin.K, &nl.K}}};
        for (const auto& [name, mats] : blocks) {
            const DominanceResult d = verify_splitting_dominance(*mats.first, *mats.second, sc.rho);
            checks.push_back({idx, name, d.margin, d.scale, d.pass});
        }
        char msg[96];
        std::snprintf(msg, sizeof msg, "state %d: M %s A %s K %s", idx,
                      checks[checks.size() - 3].pass ? "ok" : "FAIL",
                      checks[checks.size() - 2].pass ? "ok" : "FAIL",
                      checks[checks.size() - 1].pass ? "ok" : "FAIL");
        say(log, msg);
    }
    return checks;
}

void write_splitting_csv(const std::vector<SplittingCheck>& checks, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "state,block,margin,scale,pass\n";
    for (const SplittingCheck& s : checks) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d,%s,%.10e,%.10e,%d\n", s.state_index, s.block.c_str(),
                      s.margin, s.scale, s.pass ? 1 : 0);
        os << buf;
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

SimulationResult simulate(const ExperimentConfig& c, SchemeKind scheme, int N_t,
                          const std::string& directory, const LogFn& log) {
    c.validate();
    const Problem problem = make_problem(c, c.mesh.N);
    TransientOptions o = transient_options(c, problem, scheme, N_t);
    if (!directory.empty()) {
        std::filesystem::create_directories(directory);
        char name[32];
        std::snprintf(name, sizeof name, "state_%04d.csv", 0);
        write_state_csv(problem.disc.mesh(), problem.initial,
                        (std::filesystem::path(directory) / name).string());
        o.on_step = [&](const StepReport& rep, const State& s) {
            char file[32];
            std::snprintf(file, sizeof file, "state_%04d.csv", rep.step);
            write_state_csv(problem.disc.mesh(), s, (std::filesystem::path(directory) / file).string());
        };
    }
    SimulationResult out;
    out.transient = run_transient(problem.disc, problem.initial, o);
    say(log, std::string(scheme_name(scheme)) + " N_t=" + std::to_string(N_t) + " finished " +
                 std::to_string(out.transient.reports.size()) + " steps");

    ResultRow& row = out.row;
    row.experiment = "simulate";
    row.grid = grid_label(c.mesh.N);
    row.scheme = scheme_name(scheme);
    row.smoother = "direct";
    row.colors = 0;
    std::vector<int> solves;
    for (const StepReport& rep : out.transient.reports)
        solves.push_back(scheme == SchemeKind::implicit_picard ? rep.picard_iterations : 1);
    row.iters_mean = mean_of(solves);
    row.converged = out.transient.completed;
    row.solve_s = c.output.timings ? out.transient.solve_seconds : 0.0;
    row.total_s = c.output.timings ? out.transient.total_seconds : 0.0;
    return out;
}

}  // namespace unsatporo
