#pragma once

#include <optional>
#include <vector>

#include "resonia/caustic.hpp"
#include "resonia/core.hpp"
#include "resonia/eikonal.hpp"
#include "resonia/potential.hpp"
#include "resonia/resonance.hpp"

namespace resonia {

// Universal stationary-phase constant, calibrated once on the fold normal
// form against the Green-formula flux of the exact Airy state and frozen.
// The acceptance suite re-derives it and checks the frozen value.
inline constexpr double kFoldCalibration = 1.0;

// Green-formula width from a 1D state: two-point surface version of
//   Im rho = -(h^2/||u||_W^2) Im sum (du/dn) conj(u).
// Normal derivatives use one-sided 4th-order stencils from inside W.
double green_width(const std::vector<double>& x, const std::vector<cplx>& u, double h,
                   double surface_left, double surface_right, double island_radius);

struct Beta0Density {
    double direct = 0.0;     // -Im(d phi~/dn) |a0~|^2 at the probe point
    double limit = 0.0;      // pi c0(xi_c)^2 / nu1(xi_c)
    double probe_xn_plus_b = 0.0;
};

Beta0Density beta0_density(const LagrangianChart& chart, double xn_plus_b_probe, double h);

// f0 prediction: K * sum over Gamma exits of the boundary-limit density
// (n_Gamma = 0; the transverse Gaussian factor is 1 in 1D).
double stationary_phase_f0(const std::vector<Beta0Density>& exits,
                           double calibration = kFoldCalibration);

struct LadderPoint {
    double h = 0.0;
    double lambda_D = 0.0;
    double im_rho_eig = 0.0;
    double re_rho = 0.0;
    double im_rho_green = 0.0;
    std::vector<double> green_by_offset;  // sigma-independence data
    double eig_residual = 0.0;
};

struct AsymptoticFit {
    double S_fit = 0.0;
    double p_fit = 0.0;
    double f0_fit = 0.0;
    double rms_residual = 0.0;
    double loo_S_spread = 0.0;  // leave-one-out spread of S_fit
};

// Least squares of ln(-Im rho) = a (1/h) + p ln h + c.
AsymptoticFit asymptotic_fit(const std::vector<double>& hs, const std::vector<double>& im_rho);

struct WidthOptions {
    std::vector<double> ladder{0.05, 0.04, 0.035, 0.03, 0.025};
    double theta = 0.3;
    double R0 = 4.0;
    double box = 12.0;
    int nodes = 6000;
    double eta_fraction = 0.2;            // Dirichlet ball eta = fraction * S
    std::vector<double> surface_offsets{1.10, 1.15, 1.20};
    int threads = 0;                      // 0: use RESONIA_THREADS or hardware
};

struct WidthReport {
    std::vector<LadderPoint> points;
    double S_used = 0.0;
    int n_gamma = 0;
    double f0_pred = 0.0;
    std::optional<AsymptoticFit> fit;
    std::string skip_reason;  // non-empty when the fit was not computed
};

WidthReport run_width_ladder(const PotentialSpec& spec, const WidthOptions& opt);

}  // namespace resonia
