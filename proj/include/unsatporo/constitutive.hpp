/// @file constitutive.hpp
/// @brief Van Genuchten retention and conductivity, water-dependent elasticity
/// and the derived storage/mobility coefficients of the coupled system.

#ifndef UNSATPORO_CONSTITUTIVE_HPP
#define UNSATPORO_CONSTITUTIVE_HPP

#include <array>
#include <optional>
#include <vector>

namespace unsatporo {

struct VanGenuchtenParams {
    double theta_r = 0.03;
    double theta_s = 0.45;
    double beta = 0.01;  ///< 1/cm
    double n_theta = 1.6;
    double eta = 0.5;

    double m_theta() const { return 1.0 - 1.0 / n_theta; }
    void validate() const;
};

/// Per-cell Young's moduli plus the global Poisson ratio and modulus exponent.
struct ElasticityParams {
    double nu = 0.37;
    double zeta_E = 1.5;
    std::vector<double> E_d;  ///< Pa, one value per fine cell
    std::vector<double> E_w;  ///< Pa, one value per fine cell

    void validate() const;
};

struct FluidSolidParams {
    double rho_w = 1000.0;
    double rho_s = 2650.0;
    double g_scalar = -9.8;
    std::array<double, 2> g_vec{0.0, -9.8};
    double phi = 0.45;
    double alpha = 0.9;
    double C_w = 4.4e-10;
    double C_s = 1e-11;
    double mu_w = 1e-3;
    std::vector<double> k_s;  ///< m^2, one value per fine cell

    void validate() const;
};

/// Complete per-cell material description.
///
/// When frozen_pressure is set every coefficient is evaluated at that pressure
/// regardless of the state, which makes the problem linear.
struct MaterialModel {
    VanGenuchtenParams vg;
    ElasticityParams elastic;
    FluidSolidParams fluid;
    std::optional<double> frozen_pressure;

    int n_cells() const { return static_cast<int>(fluid.k_s.size()); }
    void validate() const;

    /// Homogeneous fields on n_cells cells.
    static MaterialModel homogeneous(int n_cells, double k_s, double E_d, double r_E);
};

/// Head in cm from pressure in Pa, h = p / (rho_w g).
double pressure_to_head(double p, const FluidSolidParams& fluid);

struct WaterContent {
    double theta;
    double dtheta_dh;  ///< 1/cm
};

WaterContent water_content(double h_cm, const VanGenuchtenParams& vg);
double effective_saturation(double h_cm, const VanGenuchtenParams& vg);
double relative_conductivity(double s_e, const VanGenuchtenParams& vg);

struct ElasticModuli {
    double E;
    double lambda;
    double mu;
};

ElasticModuli young_and_lame(double s_e, int cell, const ElasticityParams& ep);
ElasticModuli lame_from_young(double E, double nu);

/// All pressure-dependent coefficients at one point.
struct PointCoefficients {
    double S;       ///< saturation theta / phi
    double dS_dp;   ///< analytic derivative, 1/Pa
    double c;       ///< storage
    double kappa;   ///< mobility k_s k_rw / mu_w
    double lambda;
    double mu;
    double rho_b;
};

/// Evaluates the coefficients at pressure p in the given cell.
///
/// The storage uses |dS/dp|: with the signed gravity convention dS/dp is
/// negative, and the magnitude keeps the storage term positive.
PointCoefficients storage_and_mobility(double p, int cell, const MaterialModel& mat);

/// Per-cell maxima over a uniform pressure sample.
struct CoefficientBounds {
    std::vector<double> c;
    std::vector<double> kappa;
    std::vector<double> S;
    std::vector<double> lambda;
    std::vector<double> mu;
    double p_min = 0.0;
    double p_max = 0.0;
    int n_samples = 0;
};

CoefficientBounds coefficient_bounds(double p_min, double p_max, int n_samples,
                                     const MaterialModel& mat);

}  // namespace unsatporo

#endif  // UNSATPORO_CONSTITUTIVE_HPP
