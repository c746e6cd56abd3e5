#pragma once

#include <functional>
#include <vector>

#include "resonia/core.hpp"
#include "resonia/numerics.hpp"
#include "resonia/potential.hpp"
#include "resonia/wkb.hpp"

namespace resonia {

// Holomorphic approximation of a smooth function on an interval.
//   Mode A: Chebyshev interpolant evaluated in the complex plane (default).
//   Mode B: truncated-Taylor almost-analytic extension with smooth cutoffs.
enum class HoloMode { ChebyshevA, TaylorB };

class HoloApprox {
  public:
    HoloApprox() = default;

    cplx operator()(cplx z) const;
    double real_axis_error() const { return axis_err_; }

    friend HoloApprox holomorphic_approx(const std::function<double(double)>& f, double a,
                                         double b, double delta, HoloMode mode, int n_nodes,
                                         int taylor_order);

  private:
    HoloMode mode_ = HoloMode::ChebyshevA;
    double a_ = 0.0, b_ = 0.0, delta_ = 0.1;
    // Chebyshev data (used by both modes; B differentiates it).
    std::vector<double> nodes_, fvals_, bary_w_;
    // Mode B: derivative polynomials and cutoff thresholds.
    std::vector<Poly> derivs_;
    std::vector<double> eps_;
    double axis_err_ = 0.0;
};

HoloApprox holomorphic_approx(const std::function<double(double)>& f, double a, double b,
                              double delta, HoloMode mode = HoloMode::ChebyshevA,
                              int n_nodes = 40, int taylor_order = 8);

// ---------------------------------------------------------------------------

// One-variable Lagrangian chart at a boundary point x1 (1D potentials; 2D
// radial cases reduce to this in the normal slice).
struct LagrangianChart {
    BoundaryFrame frame;
    double S = 0.0;          // d(x0, x1)
    Poly F;                  // F(xi) = -x_n on Lambda = dg/dxi
    Poly g;                  // int F, g(0) = 0
    double xi_c = 0.0;       // critical point of F (fold center)
    double b = 0.0;          // F(xi_c); caustic at x_n = -b
    double a_val = 0.0;      // g(xi_c)
    double nu1_c = 0.0;      // nu1(xi_c) = F''(xi_c)/2
    double nu0_c = 0.0;      // nu0(xi_c) = 3 G3 (cubic Taylor coefficient of g)
    Series nu1_taylor{1};    // nu1 Taylor coefficients at xi_c
    double xi_data_max = 0.0;   // fitted |xi - xi_c| range
    double fit_radius = 0.0;    // max |x_n + b| covered by flow samples
    double extension_factor = 2.0;  // trust region multiplier for the fit
    double fit_residual = 0.0;
    Poly c0;                 // matched symbol (after match_symbol_c)
    bool has_c0 = false;

    double xn_plus_b_max() const { return fit_radius; }
    bool in_chart(double xn) const {
        return std::abs(xn + b) <= extension_factor * fit_radius;
    }
};

struct ChartControls {
    double t_span = 30.0;
    double xi_keep_fraction = 0.8;   // part of the monotone xi range used
    int fit_degree = 8;
    double fit_tol = 1e-3;           // hard failure threshold
    int lagrange_order = 8;
};

// Fits the chart from Hamilton-flow samples through (x1, 0).
LagrangianChart fit_chart(const PotentialSpec& spec, Vec x1, const ChartControls& ctl = {});

// Synthetic fold normal form V = E0 - C0 x_n: g = xi^3/(3 C0), exact chart.
LagrangianChart make_fold_chart(double C0, double xi_range, double S = 0.0);

// Critical points of xi -> x_n xi + g(xi), i.e. roots of x_n + F(xi) = 0.
struct CriticalPoints {
    cplx plus;     // xi^+ (real inside) or xi^{+i} (Im > 0 outside)
    cplx minus;    // xi^- or xi^{-i} (Im < 0, the outgoing branch)
    bool outside = false;
};

CriticalPoints critical_points(const LagrangianChart& chart, double xn);

struct ComplexPhasePoint {
    double xn = 0.0;
    cplx xi_crit;       // xi^{-i} outside, xi^+ inside
    cplx phi_tilde;     // x_n xi* + g(xi*)
    cplx r_tilde;       // g''(xi*)/2
    bool outside = false;
};

ComplexPhasePoint phase_phi_tilde(const LagrangianChart& chart, double xn);

// nu_tilde(z) from the critical-value representation
//   x_n xi* + g(xi*) = a - b xi_c - xi_c z^2 - nu_tilde(z) z^3,
// z = -i sqrt(x_n+b) outside, sqrt(-(x_n+b)) inside.
cplx nu_tilde_of(const LagrangianChart& chart, double xn);

// nu_tilde(0) by series composition of the critical value in z; identical to
// (2/3) nu1(xi_c)^{-1/2} as an algebraic identity of the chart.
cplx nu_tilde_zero(const LagrangianChart& chart);

// Matches c0 on the xi^+ branch against the interior WKB amplitude (Eq. route:
// c0(xi^+(x)) = sqrt(r(x)/pi) a0(x)) and extends it smoothly across xi_c.
struct MatchControls {
    double xi_lo_frac = 0.25;  // matching window within the xi^+ branch
    double xi_hi_frac = 0.75;
    int n_nodes = 24;
    int degree = 4;
};

void match_symbol_c(LagrangianChart& chart, const Wkb1D& wkb, const MatchControls& ctl = {});

// Steepest-descent polyline quadrature of
//   I[c](x, h) = h^{-1/2} int_gamma e^{-(x_n xi + g(xi))/h} c(xi) dxi.
struct ContourControls {
    double gain_factor = 10.0;   // endpoint criterion: gain >= factor * h ln(1/h)
    int points_per_segment = 96;
    HoloMode mode = HoloMode::ChebyshevA;
};

cplx airy_eval(const LagrangianChart& chart, const Poly& c0, double xn, double h,
               const ContourControls& ctl = {});

// Same integral with caller-provided holomorphic data (mode fidelity tests).
cplx airy_eval_custom(const LagrangianChart& chart, const std::function<cplx(cplx)>& g_tilde,
                      const std::function<cplx(cplx)>& c_tilde, double xn, double h,
                      const ContourControls& ctl = {});

struct SteepestExpansion {
    cplx value;                  // e^{-phi/h}/sqrt(r) sum_j Gamma(j+1/2) Phi_2j (h/r)^j
    std::vector<cplx> beta;      // beta_m = Gamma(m+1/2) Phi_{2m} r^{2m}
    cplx a0_tilde;               // sqrt(pi/r) c0(xi*)
    cplx a1_tilde;               // h-coefficient of the expansion
    ComplexPhasePoint at;
};

struct BandControls {
    double band_lo = 0.25;   // fractions of fit_radius, distance from C
    double band_hi = 0.55;
    // The strip-width assertion: band_lo * fit_radius vs scale * (h ln 1/h)^{2/3}.
    double strip_scale = 0.5;
};

SteepestExpansion steepest_expand(const LagrangianChart& chart, const Poly& c0, double xn,
                                  double h, int L, const BandControls& band = {});

struct OutwardSample {
    double xn_plus_b = 0.0;
    cplx phi_tilde;
    cplx w;            // h^{-n/4} e^{-(S+phi)/h} (a0~ + h a1~)
    double a0_abs = 0.0;
};

std::vector<OutwardSample> outward_wkb(const LagrangianChart& chart, const Poly& c0,
                                       const std::vector<double>& xn_values, double h,
                                       const BandControls& band = {});

}  // namespace resonia
