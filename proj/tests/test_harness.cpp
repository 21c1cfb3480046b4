#include "unsatporo/studies.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace unsatporo;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.mesh.N = 8;
    c.mesh.N_H = 2;
    c.time.N_t = {4, 8};
    c.time.reference_N_t = 16;
    c.output.timings = false;
    return c;
}

std::string csv_of(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_results_csv(rows, os);
    return os.str();
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> fields;
        std::string f;
        std::istringstream ls(line);
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        out.push_back(fields);
    }
    return out;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("unsatporo_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("configuration loading") {
    SUBCASE("defaults validate") { CHECK_NOTHROW(ExperimentConfig{}.validate()); }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"mesh": {"NN": 4}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"meshes": {}})")), ConfigError);
    }
    SUBCASE("bad values are rejected") {
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"mesh": {"N": 30, "N_H": 8}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"schemes": ["RK4"]})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"solver": {"colors": [3]}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"mesh": {"N": "big"}})")), ConfigError);
    }
    SUBCASE("partial files keep defaults") {
        const ExperimentConfig c = config_from_json(nlohmann::json::parse(R"({"mesh": {"N": 16}})"));
        CHECK(c.mesh.N == 16);
        CHECK(c.mesh.N_H == 8);
        CHECK(c.time.reference_N_t == 320);
    }
    SUBCASE("resolved form round trips") {
        ExperimentConfig c = small_config();
        c.frozen_pressure = 4e5;
        c.solver.smoothers = {"GS", "VK2"};
        const nlohmann::json j = config_to_json(c);
        CHECK(config_to_json(config_from_json(j)) == j);
    }
}

TEST_CASE("heterogeneity fields") {
    const StructuredTriMesh mesh(16, 10.0);
    HeterogeneityGenSpec spec;
    SUBCASE("zero contrast is homogeneous") {
        spec.contrast = 0.0;
        const HeterogeneityFields f = generate_fields(mesh, spec);
        for (double k : f.k_s) CHECK(k == doctest::Approx(spec.k_s0));
    }
    SUBCASE("same seed, same field") {
        CHECK(generate_fields(mesh, spec).k_s == generate_fields(mesh, spec).k_s);
        HeterogeneityGenSpec other = spec;
        other.seed = 7;
        CHECK(generate_fields(mesh, other).k_s != generate_fields(mesh, spec).k_s);
    }
    SUBCASE("four orders of contrast") {
        spec.contrast = 4.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            spec.seed = seed;
            const HeterogeneityFields f = generate_fields(mesh, spec);
            const auto [lo, hi] = std::minmax_element(f.k_s.begin(), f.k_s.end());
            const double ratio = *hi / *lo;
            CHECK(ratio >= 500.0);
            CHECK(ratio <= 2e5);
            for (std::size_t e = 0; e < f.E_d.size(); ++e) {
                CHECK(f.E_d[e] > 0.0);
                CHECK(f.E_w[e] == doctest::Approx(f.E_d[e] / spec.r_E));
            }
        }
    }
    SUBCASE("CSV round trip") {
        const fs::path dir = scratch("fields");
        const HeterogeneityFields f = generate_fields(mesh, spec);
        write_fields_csv(f, (dir / "f.csv").string());
        const HeterogeneityFields g = read_fields_csv((dir / "f.csv").string());
        CHECK(g.k_s == f.k_s);
        CHECK(g.E_d == f.E_d);
        CHECK(g.E_w == f.E_w);
    }
    SUBCASE("field file must match the mesh") {
        const fs::path dir = scratch("fields_mismatch");
        write_fields_csv(generate_fields(StructuredTriMesh(8, 10.0), spec), (dir / "f.csv").string());
        ExperimentConfig c;
        c.fields.file = (dir / "f.csv").string();
        CHECK_THROWS_AS(fields_for(c, mesh), ConfigError);
    }
}

TEST_CASE("result tables") {
    SUBCASE("empty input writes the header only") {
        CHECK(csv_of({}) == std::string(kResultsHeader) + "\n");
    }
    SUBCASE("JSON round trip keeps missing errors") {
        ResultRow a;
        a.experiment = "x";
        a.grid = "8x8";
        a.scheme = "Im";
        a.smoother = "direct";
        a.iters_mean = 2.5;
        ResultRow b = a;
        b.scheme = "sIm";
        b.e_p = 1e-3;
        b.e_u = 2e-3;
        b.converged = false;
        b.iters_cap = 500;
        const std::vector<ResultRow> rows{a, b};
        CHECK(results_from_json(results_to_json(rows)) == rows);
    }
    SUBCASE("non-converged cells print the cap") {
        ResultRow r;
        r.experiment = "solver-study";
        r.grid = "8x8";
        r.scheme = "ImEx";
        r.smoother = "Jacobi";
        r.sweeps = 3;
        r.M = 1;
        r.converged = false;
        r.iters_cap = 500;
        CHECK(csv_of({r}).find(">500") != std::string::npos);
        CHECK(format_solver_table({r}, "8x8").find(">500") != std::string::npos);
    }
}

TEST_CASE("solver grid expansion") {
    SolverGridConfig s;
    s.smoothers = {"GS", "VK2"};
    s.colors = {1, 4};
    s.sweeps = {3};
    s.M = {1, 8};
    s.grids = {32, 64};
    const auto cells = solver_cells(s);
    CHECK(cells.size() == 2 * (2 + 4));
    for (const SolverCell& c : cells)
        if (c.smoother == "GS") CHECK(c.colors == 1);
}

TEST_CASE("time-scheme study") {
    SUBCASE("single scheme, single step count") {
        ExperimentConfig c = small_config();
        c.schemes = {SchemeKind::semi_implicit};
        c.time.N_t = {4};
        const TimeStudyResult r = run_time_scheme_study(c);
        REQUIRE(r.rows.size() == 1);
        CHECK(r.rows[0].scheme == "sIm");
        CHECK(r.rows[0].e_p > 0.0);
        CHECK(r.reference_N_t == 16);
        CHECK(r.picard_counts.empty());
    }
    SUBCASE("pressure-independent coefficients: all schemes match the reference") {
        ExperimentConfig c = small_config();
        c.frozen_pressure = 4e5;
        c.time.N_t = {16};
        const TimeStudyResult r = run_time_scheme_study(c);
        REQUIRE(r.rows.size() == 3);
        for (const ResultRow& row : r.rows) {
            CHECK(row.e_p <= 1e-9);
            CHECK(row.e_u <= 1e-9);
        }
    }
    SUBCASE("repeatable output") {
        const ExperimentConfig c = small_config();
        CHECK(csv_of(run_time_scheme_study(c).rows) == csv_of(run_time_scheme_study(c).rows));
    }
    SUBCASE("golden output") {
        const std::string golden = std::string(UNSATPORO_TEST_DATA_DIR) + "/time_study_small.csv";
        std::ifstream is(golden);
        REQUIRE(is.good());
        std::stringstream buf;
        buf << is.rdbuf();
        const auto want = split_csv(buf.str());
        const auto got = split_csv(csv_of(run_time_scheme_study(small_config()).rows));
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            REQUIRE(got[i].size() == want[i].size());
            for (std::size_t k = 0; k < got[i].size(); ++k) {
                if (i == 0 || k < 7 || want[i][k].empty()) {
                    CHECK(got[i][k] == want[i][k]);
                    continue;
                }
                const double a = std::stod(got[i][k]), b = std::stod(want[i][k]);
                INFO("row " << i << " column " << k);
                CHECK(std::abs(a - b) <= 1e-6 * std::max(std::abs(b), 1e-300));
            }
        }
    }
}

TEST_CASE("solver study") {
    ExperimentConfig c;
    c.mesh.N = 16;
    c.mesh.N_H = 4;
    c.output.timings = false;
    c.solver.grids = {16};
    c.solver.smoothers = {"GS", "VK2"};
    c.solver.colors = {4};
    c.solver.sweeps = {3};
    c.solver.M = {4};
    c.solver.N_t = 6;
    const SolverStudyResult r = run_solver_study(c);
    REQUIRE(r.rows.size() == 2);
    REQUIRE(r.counters.size() == 2);
    REQUIRE(r.tables.size() == 1);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const CellCounters& cc = r.counters[i];
        CHECK(r.rows[i].smoother == cc.cell.smoother);
        CHECK(r.rows[i].converged);
        CHECK(r.rows[i].e_p <= 1e-6);
        CHECK(cc.iterations.size() == 5);
        CHECK(cc.imex_matrix_assemblies == 1);
        CHECK(cc.coarse_factorizations == 1);
        CHECK(cc.imex_solver_setups == 1);
        CHECK(cc.vanka_setups == (cc.cell.smoother == "GS" ? 0 : 1));
    }
    CHECK(r.tables[0].find("grid 16x16") != std::string::npos);
    CHECK(r.tables[0].find("M=4") != std::string::npos);

    SUBCASE("a single cell gives a one-entry table") {
        c.solver.smoothers = {"VK2"};
        const SolverStudyResult one = run_solver_study(c);
        REQUIRE(one.rows.size() == 1);
        CHECK(one.tables[0].find("n/a") == std::string::npos);
    }
}

TEST_CASE("splitting validation and simulation") {
    ExperimentConfig c;
    c.mesh.N = 8;
    c.mesh.N_H = 2;
    c.splitting.N = 8;
    c.splitting.N_t = 10;
    c.splitting.states = 5;
    const auto checks = validate_splitting(c);
    CHECK(checks.size() == 15);
    for (const SplittingCheck& s : checks) CHECK(s.pass);

    const fs::path dir = scratch("simulate");
    const SimulationResult sim = simulate(c, SchemeKind::imex, 4, dir.string());
    CHECK(sim.transient.completed);
    CHECK(sim.row.scheme == "ImEx");
    CHECK(fs::exists(dir / "state_0000.csv"));
    CHECK(fs::exists(dir / "state_0004.csv"));
}

TEST_CASE("parallel_for") {
    std::vector<int> hit(50, 0);
    parallel_for(50, 4, [&](int i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
    CHECK_THROWS_AS(parallel_for(10, 3, [](int i) { if (i == 5) throw std::runtime_error("x"); }),
                    std::runtime_error);
}
