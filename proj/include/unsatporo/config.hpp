/// @file config.hpp
/// @brief Experiment configuration: JSON loading, validation and the mapping
/// onto the library's parameter records.

#ifndef UNSATPORO_CONFIG_HPP
#define UNSATPORO_CONFIG_HPP

#include "unsatporo/assembly.hpp"
#include "unsatporo/fields.hpp"
#include "unsatporo/time_integration.hpp"
#include "unsatporo/two_grid.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsatporo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshConfig {
    int N = 32;
    double L = 10.0;
    int N_H = 8;
};

struct TimeConfig {
    double T_max = 172800.0;
    std::vector<int> N_t{10, 20, 40, 80};
    int reference_N_t = 320;
};

struct InitialConfig {
    double p0 = 602700.0;
    bool compatible_boundary = false;
};

struct FieldConfig {
    HeterogeneityGenSpec gen;
    /// When set, fields are read from this CSV instead of generated.
    std::string file;
};

struct BoundsConfig {
    /// Default to [p1, p0] when unset.
    std::optional<double> p_min;
    std::optional<double> p_max;
    int samples = 64;
};

struct ImexConfig {
    ImexMechanicsForm mechanics_form = ImexMechanicsForm::equilibrium;
    bool warm_start = true;
    bool reset_history_after_bootstrap = true;
};

struct SolverGridConfig {
    std::vector<std::string> smoothers{"Jacobi", "GS", "V", "VK", "VK1", "VK2"};
    std::vector<int> colors{1, 2, 4};
    std::vector<int> sweeps{1, 2, 3};
    std::vector<int> M{1, 2, 4, 8};
    std::vector<int> grids{64};
    int N_t = 20;
    /// Steps of the transient actually run per cell; 0 runs all N_t.
    int steps = 0;
    double rel_tol = 1e-8;
    int max_iters = 500;
    ResidualNorm norm = ResidualNorm::diagonal_scaled;
    ResidualReference reference = ResidualReference::initial;
    double jacobi_damping = 2.0 / 3.0;
    bool close_clusters = true;
    /// Directory for cached spectral bases; empty disables the cache.
    std::string basis_cache;
};

struct SplittingConfig {
    double rho = 0.05;
    int states = 20;
    int N = 16;
    int N_t = 20;
};

struct OutputConfig {
    std::string directory = "runs/latest";
    /// false writes zero timings so outputs are bit-stable.
    bool timings = true;
};

struct ExperimentConfig {
    MeshConfig mesh;
    TimeConfig time;
    VanGenuchtenParams vg;
    ElasticityParams elastic;
    FluidSolidParams fluid;
    std::optional<double> frozen_pressure;
    BoundaryConfig boundary;
    SourceConfig source;
    InitialConfig initial;
    FieldConfig fields;
    BoundsConfig bounds;
    std::vector<SchemeKind> schemes{SchemeKind::implicit_picard, SchemeKind::semi_implicit,
                                    SchemeKind::imex};
    PicardSettings picard;
    ImexConfig imex;
    SolverGridConfig solver;
    SplittingConfig splitting;
    OutputConfig output;
    int workers = 1;

    void validate() const;
    double p_min() const { return bounds.p_min.value_or(boundary.p1); }
    double p_max() const { return bounds.p_max.value_or(initial.p0); }
};

/// Unknown keys are errors; missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Fully resolved configuration, every key present.
nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace unsatporo

#endif  // UNSATPORO_CONFIG_HPP
