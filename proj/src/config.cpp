#include "unsatporo/config.hpp"

#include <fstream>
#include <set>

namespace unsatporo {

using nlohmann::json;

namespace {

/// Reads keys of one JSON object and rejects keys it was never asked about.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    void get_optional(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T v{};
        get(key, v);
        out = v;
    }

    /// Calls f(subsection) when the key is present.
    template <typename F>
    void sub(const char* key, F&& f) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        Section s(j_.at(key), path_ + "." + key);
        f(s);
    }

    std::string path(const char* key) const { return path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const std::string& where) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    std::string names;
    for (const auto& [name, value] : table) names += std::string(names.empty() ? "" : ", ") + name;
    throw ConfigError(where + ": '" + s + "' is not one of " + names);
}

Side parse_side(const std::string& s, const std::string& where) {
    return parse_enum<Side>(s,
                            {{"bottom", Side::bottom},
                             {"right", Side::right},
                             {"top", Side::top},
                             {"left", Side::left}},
                            where);
}

const char* form_name(ImexMechanicsForm f) {
    return f == ImexMechanicsForm::incremental ? "incremental" : "equilibrium";
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void ExperimentConfig::validate() const {
    require(mesh.N >= 2, "mesh.N must be >= 2");
    require(mesh.L > 0.0, "mesh.L must be > 0");
    require(mesh.N_H >= 1 && mesh.N % mesh.N_H == 0, "mesh.N must be divisible by mesh.N_H");
    require(time.T_max > 0.0, "time.T_max must be > 0");
    require(!time.N_t.empty(), "time.N_t must list at least one step count");
    for (int n : time.N_t) require(n >= 1, "time.N_t entries must be >= 1");
    require(time.reference_N_t >= 1, "time.reference_N_t must be >= 1");
    try {
        vg.validate();
        fluid.validate();
        ElasticityParams e = elastic;
        e.E_d.clear();
        e.E_w.clear();
        e.validate();
        fields.gen.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    require(boundary.gamma >= 0.0, "boundary.gamma must be >= 0");
    require(bounds.samples >= 2, "bounds.samples must be >= 2");
    require(p_min() <= p_max(), "bounds: p_min must not exceed p_max");
    require(!schemes.empty(), "schemes must not be empty");
    require(picard.max_iters >= 1, "picard.max_iters must be >= 1");
    require(picard.rel_tol_p > 0.0 && picard.rel_tol_u > 0.0, "picard tolerances must be > 0");
    for (const auto& s : solver.smoothers) {
        try {
            SmootherConfig::from_label(s);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(std::string("solver.smoothers: ") + ex.what());
        }
    }
    for (int c : solver.colors) require(c == 1 || c == 2 || c == 4, "solver.colors must be 1, 2 or 4");
    for (int s : solver.sweeps) require(s >= 1, "solver.sweeps entries must be >= 1");
    for (int m : solver.M) require(m >= 1, "solver.M entries must be >= 1");
    for (int g : solver.grids)
        require(g >= 2 && g % mesh.N_H == 0, "solver.grids entries must be divisible by mesh.N_H");
    require(solver.N_t >= 2, "solver.N_t must be >= 2");
    require(solver.steps >= 0 && solver.steps <= solver.N_t, "solver.steps must lie in [0, N_t]");
    require(solver.rel_tol > 0.0, "solver.rel_tol must be > 0");
    require(solver.max_iters >= 1, "solver.max_iters must be >= 1");
    require(solver.jacobi_damping > 0.0, "solver.jacobi_damping must be > 0");
    require(splitting.rho > 0.0 && splitting.rho < 1.0, "splitting.rho must lie in (0, 1)");
    require(splitting.states >= 1, "splitting.states must be >= 1");
    require(splitting.N >= 2, "splitting.N must be >= 2");
    require(splitting.N_t >= 1, "splitting.N_t must be >= 1");
    require(workers >= 1, "workers must be >= 1");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    {
        Section root(j, "config");
        root.sub("mesh", [&](Section& s) {
            s.get("N", c.mesh.N);
            s.get("L", c.mesh.L);
            s.get("N_H", c.mesh.N_H);
        });
        root.sub("time", [&](Section& s) {
            s.get("T_max", c.time.T_max);
            s.get("N_t", c.time.N_t);
            s.get("reference_N_t", c.time.reference_N_t);
        });
        root.sub("physics", [&](Section& phys) {
            phys.sub("van_genuchten", [&](Section& s) {
                s.get("theta_r", c.vg.theta_r);
                s.get("theta_s", c.vg.theta_s);
                s.get("beta", c.vg.beta);
                s.get("n_theta", c.vg.n_theta);
                s.get("eta", c.vg.eta);
            });
            phys.sub("elasticity", [&](Section& s) {
                s.get("nu", c.elastic.nu);
                s.get("zeta_E", c.elastic.zeta_E);
            });
            phys.sub("fluid", [&](Section& s) {
                s.get("rho_w", c.fluid.rho_w);
                s.get("rho_s", c.fluid.rho_s);
                s.get("g", c.fluid.g_scalar);
                s.get("g_vec", c.fluid.g_vec);
                s.get("phi", c.fluid.phi);
                s.get("alpha", c.fluid.alpha);
                s.get("C_w", c.fluid.C_w);
                s.get("C_s", c.fluid.C_s);
                s.get("mu_w", c.fluid.mu_w);
            });
            phys.get_optional("frozen_pressure", c.frozen_pressure);
        });
        root.sub("boundary", [&](Section& s) {
            s.get("gamma", c.boundary.gamma);
            s.get("p1", c.boundary.p1);
            std::string side = side_name(c.boundary.robin_side);
            s.get("robin_side", side);
            c.boundary.robin_side = parse_side(side, s.path("robin_side"));
            s.get("constrain_left_ux", c.boundary.constrain_left_ux);
            s.get("constrain_bottom_uy", c.boundary.constrain_bottom_uy);
            s.get("source", c.source.f);
            s.get("elevation_term", c.source.elevation_term);
        });
        root.sub("initial", [&](Section& s) {
            s.get("p0", c.initial.p0);
            s.get("compatible_boundary", c.initial.compatible_boundary);
        });
        root.sub("fields", [&](Section& s) {
            s.get("seed", c.fields.gen.seed);
            s.get("contrast", c.fields.gen.contrast);
            s.get("k_s0", c.fields.gen.k_s0);
            s.get("E_d0", c.fields.gen.E_d0);
            s.get("ed_amplitude", c.fields.gen.ed_amplitude);
            s.get("r_E", c.fields.gen.r_E);
            s.get("n_modes", c.fields.gen.n_modes);
            s.get("correlation_length", c.fields.gen.correlation_length);
            s.get("file", c.fields.file);
        });
        root.sub("bounds", [&](Section& s) {
            s.get_optional("p_min", c.bounds.p_min);
            s.get_optional("p_max", c.bounds.p_max);
            s.get("samples", c.bounds.samples);
        });
        std::vector<std::string> schemes;
        root.get("schemes", schemes);
        if (!schemes.empty()) {
            c.schemes.clear();
            for (const auto& s : schemes) {
                try {
                    c.schemes.push_back(parse_scheme(s));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string("config.schemes: ") + e.what());
                }
            }
        }
        root.sub("picard", [&](Section& s) {
            s.get("max_iters", c.picard.max_iters);
            s.get("rel_tol_p", c.picard.rel_tol_p);
            s.get("rel_tol_u", c.picard.rel_tol_u);
        });
        root.sub("imex", [&](Section& s) {
            std::string form = form_name(c.imex.mechanics_form);
            s.get("mechanics_form", form);
            c.imex.mechanics_form = parse_enum<ImexMechanicsForm>(
                form,
                {{"incremental", ImexMechanicsForm::incremental},
                 {"equilibrium", ImexMechanicsForm::equilibrium}},
                s.path("mechanics_form"));
            s.get("warm_start", c.imex.warm_start);
            s.get("reset_history_after_bootstrap", c.imex.reset_history_after_bootstrap);
        });
        root.sub("solver", [&](Section& s) {
            s.get("smoothers", c.solver.smoothers);
            s.get("colors", c.solver.colors);
            s.get("sweeps", c.solver.sweeps);
            s.get("M", c.solver.M);
            s.get("grids", c.solver.grids);
            s.get("N_t", c.solver.N_t);
            s.get("steps", c.solver.steps);
            s.get("rel_tol", c.solver.rel_tol);
            s.get("max_iters", c.solver.max_iters);
            std::string norm = c.solver.norm == ResidualNorm::euclidean ? "euclidean"
                                                                        : "diagonal_scaled";
            s.get("norm", norm);
            c.solver.norm = parse_enum<ResidualNorm>(
                norm,
                {{"euclidean", ResidualNorm::euclidean},
                 {"diagonal_scaled", ResidualNorm::diagonal_scaled}},
                s.path("norm"));
            std::string ref = c.solver.reference == ResidualReference::rhs ? "rhs" : "initial";
            s.get("reference", ref);
            c.solver.reference = parse_enum<ResidualReference>(
                ref, {{"rhs", ResidualReference::rhs}, {"initial", ResidualReference::initial}},
                s.path("reference"));
            s.get("jacobi_damping", c.solver.jacobi_damping);
            s.get("close_clusters", c.solver.close_clusters);
            s.get("basis_cache", c.solver.basis_cache);
        });
        root.sub("splitting", [&](Section& s) {
            s.get("rho", c.splitting.rho);
            s.get("states", c.splitting.states);
            s.get("N", c.splitting.N);
            s.get("N_t", c.splitting.N_t);
        });
        root.sub("output", [&](Section& s) {
            s.get("directory", c.output.directory);
            s.get("timings", c.output.timings);
        });
        root.get("workers", c.workers);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["mesh"] = {{"N", c.mesh.N}, {"L", c.mesh.L}, {"N_H", c.mesh.N_H}};
    j["time"] = {{"T_max", c.time.T_max},
                 {"N_t", c.time.N_t},
                 {"reference_N_t", c.time.reference_N_t}};
    j["physics"]["van_genuchten"] = {{"theta_r", c.vg.theta_r},
                                     {"theta_s", c.vg.theta_s},
                                     {"beta", c.vg.beta},
                                     {"n_theta", c.vg.n_theta},
                                     {"eta", c.vg.eta}};
    j["physics"]["elasticity"] = {{"nu", c.elastic.nu}, {"zeta_E", c.elastic.zeta_E}};
    j["physics"]["fluid"] = {{"rho_w", c.fluid.rho_w}, {"rho_s", c.fluid.rho_s},
                             {"g", c.fluid.g_scalar},  {"g_vec", c.fluid.g_vec},
                             {"phi", c.fluid.phi},     {"alpha", c.fluid.alpha},
                             {"C_w", c.fluid.C_w},     {"C_s", c.fluid.C_s},
                             {"mu_w", c.fluid.mu_w}};
    j["physics"]["frozen_pressure"] =
        c.frozen_pressure ? json(*c.frozen_pressure) : json(nullptr);
    j["boundary"] = {{"gamma", c.boundary.gamma},
                     {"p1", c.boundary.p1},
                     {"robin_side", side_name(c.boundary.robin_side)},
                     {"constrain_left_ux", c.boundary.constrain_left_ux},
                     {"constrain_bottom_uy", c.boundary.constrain_bottom_uy},
                     {"source", c.source.f},
                     {"elevation_term", c.source.elevation_term}};
    j["initial"] = {{"p0", c.initial.p0}, {"compatible_boundary", c.initial.compatible_boundary}};
    const HeterogeneityGenSpec& g = c.fields.gen;
    j["fields"] = {{"seed", g.seed},
                   {"contrast", g.contrast},
                   {"k_s0", g.k_s0},
                   {"E_d0", g.E_d0},
                   {"ed_amplitude", g.ed_amplitude},
                   {"r_E", g.r_E},
                   {"n_modes", g.n_modes},
                   {"correlation_length", g.correlation_length},
                   {"file", c.fields.file}};
    j["bounds"] = {{"p_min", c.p_min()}, {"p_max", c.p_max()}, {"samples", c.bounds.samples}};
    j["schemes"] = json::array();
    for (SchemeKind s : c.schemes) j["schemes"].push_back(scheme_name(s));
    j["picard"] = {{"max_iters", c.picard.max_iters},
                   {"rel_tol_p", c.picard.rel_tol_p},
                   {"rel_tol_u", c.picard.rel_tol_u}};
    j["imex"] = {{"mechanics_form", form_name(c.imex.mechanics_form)},
                 {"warm_start", c.imex.warm_start},
                 {"reset_history_after_bootstrap", c.imex.reset_history_after_bootstrap}};
    const SolverGridConfig& s = c.solver;
    j["solver"] = {{"smoothers", s.smoothers},
                   {"colors", s.colors},
                   {"sweeps", s.sweeps},
                   {"M", s.M},
                   {"grids", s.grids},
                   {"N_t", s.N_t},
                   {"steps", s.steps},
                   {"rel_tol", s.rel_tol},
                   {"max_iters", s.max_iters},
                   {"norm", s.norm == ResidualNorm::euclidean ? "euclidean" : "diagonal_scaled"},
                   {"reference", s.reference == ResidualReference::rhs ? "rhs" : "initial"},
                   {"jacobi_damping", s.jacobi_damping},
                   {"close_clusters", s.close_clusters},
                   {"basis_cache", s.basis_cache}};
    j["splitting"] = {{"rho", c.splitting.rho},
                      {"states", c.splitting.states},
                      {"N", c.splitting.N},
                      {"N_t", c.splitting.N_t}};
    j["output"] = {{"directory", c.output.directory}, {"timings", c.output.timings}};
    j["workers"] = c.workers;
    return j;
}

}  // namespace unsatporo
