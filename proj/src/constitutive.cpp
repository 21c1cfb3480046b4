#include "unsatporo/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace unsatporo {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void VanGenuchtenParams::validate() const {
    require(theta_r >= 0.0 && theta_r < theta_s && theta_s <= 1.0,
            "van Genuchten: need 0 <= theta_r < theta_s <= 1");
    require(beta > 0.0, "van Genuchten: beta must be positive");
    require(n_theta > 1.0, "van Genuchten: n_theta must exceed 1");
    require(eta >= 0.0, "van Genuchten: eta must be non-negative");
}

void ElasticityParams::validate() const {
    require(nu > 0.0 && nu < 0.5, "elasticity: nu must lie in (0, 0.5)");
    require(zeta_E > 0.0, "elasticity: zeta_E must be positive");
    require(E_d.size() == E_w.size(), "elasticity: E_d and E_w must have equal length");
    for (std::size_t i = 0; i < E_d.size(); ++i)
        require(E_d[i] > 0.0 && E_w[i] > 0.0 && E_w[i] <= E_d[i],
                "elasticity: need 0 < E_w <= E_d in every cell");
}

void FluidSolidParams::validate() const {
    require(rho_w > 0.0 && rho_s > 0.0, "fluid: densities must be positive");
    require(g_scalar != 0.0, "fluid: g_scalar must be nonzero");
    require(phi > 0.0 && phi <= 1.0, "fluid: phi must lie in (0, 1]");
    require(alpha > 0.0 && alpha <= 1.0, "fluid: alpha must lie in (0, 1]");
    require(C_w >= 0.0 && C_s >= 0.0, "fluid: compressibilities must be non-negative");
    require(mu_w > 0.0, "fluid: mu_w must be positive");
    for (double k : k_s) require(k >= 0.0, "fluid: permeability must be non-negative");
}

void MaterialModel::validate() const {
    vg.validate();
    elastic.validate();
    fluid.validate();
    require(elastic.E_d.size() == fluid.k_s.size(),
            "material: permeability and modulus fields must have equal length");
}

MaterialModel MaterialModel::homogeneous(int n_cells, double k_s, double E_d, double r_E) {
    MaterialModel m;
    m.fluid.k_s.assign(n_cells, k_s);
    m.elastic.E_d.assign(n_cells, E_d);
    m.elastic.E_w.assign(n_cells, E_d / r_E);
    return m;
}

double pressure_to_head(double p, const FluidSolidParams& fluid) {
    return 100.0 * p / (fluid.rho_w * fluid.g_scalar);
}

WaterContent water_content(double h_cm, const VanGenuchtenParams& vg) {
    if (h_cm >= 0.0) return {vg.theta_s, 0.0};
    const double m = vg.m_theta();
    const double x = vg.beta * (-h_cm);
    const double xn = std::pow(x, vg.n_theta);
    const double bracket = 1.0 + xn;
    const double span = vg.theta_s - vg.theta_r;
    const double theta = vg.theta_r + span * std::pow(bracket, -m);
    const double dtheta =
        span * m * vg.n_theta * vg.beta * std::pow(x, vg.n_theta - 1.0) * std::pow(bracket, -m - 1.0);
    return {theta, dtheta};
}

double effective_saturation(double h_cm, const VanGenuchtenParams& vg) {
    const double theta = water_content(h_cm, vg).theta;
    return std::clamp((theta - vg.theta_r) / (vg.theta_s - vg.theta_r), 0.0, 1.0);
}

double relative_conductivity(double s_e, const VanGenuchtenParams& vg) {
    s_e = std::clamp(s_e, 0.0, 1.0);
    if (s_e == 0.0) return 0.0;
    const double m = vg.m_theta();
    const double inner = 1.0 - std::pow(1.0 - std::pow(s_e, 1.0 / m), m);
    return std::clamp(std::pow(s_e, vg.eta) * inner * inner, 0.0, 1.0);
}

ElasticModuli lame_from_young(double E, double nu) {
    return {E, E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

ElasticModuli young_and_lame(double s_e, int cell, const ElasticityParams& ep) {
    const double ed = ep.E_d.at(cell);
    const double ew = ep.E_w.at(cell);
    const double E = ed + (ew - ed) * std::pow(std::clamp(s_e, 0.0, 1.0), ep.zeta_E);
    return lame_from_young(E, ep.nu);
}

PointCoefficients storage_and_mobility(double p, int cell, const MaterialModel& mat) {
    const FluidSolidParams& f = mat.fluid;
    const bool frozen = mat.frozen_pressure.has_value();
    if (frozen) p = *mat.frozen_pressure;

    const double h = pressure_to_head(p, f);
    const WaterContent wc = water_content(h, mat.vg);
    const double s_e =
        std::clamp((wc.theta - mat.vg.theta_r) / (mat.vg.theta_s - mat.vg.theta_r), 0.0, 1.0);

    PointCoefficients out{};
    out.S = wc.theta / f.phi;
    // dh/dp in cm/Pa
    const double dS_dp = wc.dtheta_dh * 100.0 / (f.rho_w * f.g_scalar) / f.phi;
    const double ac = (f.alpha - f.phi) * f.C_s * out.S;
    out.c = (f.phi * f.C_w + ac) * out.S + (f.phi + ac * p) * std::abs(dS_dp);
    out.dS_dp = frozen ? 0.0 : dS_dp;
    out.kappa = f.k_s.at(cell) * relative_conductivity(s_e, mat.vg) / f.mu_w;
    const ElasticModuli em = young_and_lame(s_e, cell, mat.elastic);
    out.lambda = em.lambda;
    out.mu = em.mu;
    out.rho_b = f.phi * out.S * f.rho_w + (1.0 - f.phi) * f.rho_s;
    return out;
}

CoefficientBounds coefficient_bounds(double p_min, double p_max, int n_samples,
                                     const MaterialModel& mat) {
    if (!(p_min < p_max)) throw std::invalid_argument("coefficient_bounds: need p_min < p_max");
    if (n_samples < 2) throw std::invalid_argument("coefficient_bounds: need n_samples >= 2");
    const int nc = mat.n_cells();
    CoefficientBounds b;
    b.p_min = p_min;
    b.p_max = p_max;
    b.n_samples = n_samples;
    b.c.assign(nc, -std::numeric_limits<double>::infinity());
    b.kappa = b.c;
    b.S = b.c;
    b.lambda = b.c;
    b.mu = b.c;
    for (int s = 0; s < n_samples; ++s) {
        const double p = s == n_samples - 1
                             ? p_max
                             : p_min + (p_max - p_min) * static_cast<double>(s) / (n_samples - 1);
        for (int e = 0; e < nc; ++e) {
            const PointCoefficients pc = storage_and_mobility(p, e, mat);
            b.c[e] = std::max(b.c[e], pc.c);
            b.kappa[e] = std::max(b.kappa[e], pc.kappa);
            b.S[e] = std::max(b.S[e], pc.S);
            b.lambda[e] = std::max(b.lambda[e], pc.lambda);
            b.mu[e] = std::max(b.mu[e], pc.mu);
        }
    }
    return b;
}

}  // namespace unsatporo
