#pragma once

#include <vector>

#include "resonia/core.hpp"
#include "resonia/eikonal.hpp"
#include "resonia/potential.hpp"

namespace resonia {

// Germ of the leading amplitude at the well: the harmonic ground-state value
// c_norm * det(Hess V(x0)/2)^{1/8} * pi^{-n/4}, constant across the harmonic
// ball at leading order. c_norm = 1 matches ||u_D||_{L2} = 1.
double wkb_init_well(const PotentialSpec& spec, double c_norm = 1.0);

// Leading amplitude along a geodesic: solves da0/dt = -(Lap d - E1) a0 using
// the Liouville form a0(t) = a0(t_ref) sqrt(J(t_ref)/J(t)) e^{E1 (t - t_ref)}.
// Samples where |J| is below j_floor (caustic neighbourhood, well core) are
// masked out with zeros.
struct TransportResult {
    std::vector<double> a0;          // per path sample
    std::vector<unsigned char> ok;   // sample validity
};

TransportResult transport_solve(const PotentialSpec& spec, const GeodesicPath& path, double germ,
                                double E1, double j_floor = 1e-7);

struct WkbState {
    ScalarField phase;        // d(x0, .)
    ScalarField amplitude0;   // a0 on the same grid
    ScalarField domain_mask;  // 1 on Omega nodes (stored as 0/1 values)
    int order = 0;
    double E1 = 0.0;
    double germ = 0.0;
    // Path-sampled data ((x, d, a0) along each bundle member) for evaluation
    // off the grid; 1D keeps two members (left/right exit).
    std::vector<GeodesicPath> bundle;
    std::vector<TransportResult> amplitudes;
};

struct OmegaControls {
    double caustic_tube_cells = 3.0;
    double coverage_requirement = 0.95;
    int fan_size = 64;  // 2D bundle size
};

// Assembles the WKB state on the Agmon grid from a geodesic bundle.
WkbState extend_to_omega(const PotentialSpec& spec, const ScalarField& agmon,
                         const std::vector<GeodesicPath>& bundle, double E1, double germ,
                         const OmegaControls& ctl = {});

// Smooth 1D evaluator: d by direct quadrature of sqrt((V-E0)_+), a0 as the
// exact Liouville transport solution anchored at the well,
//   a0(x) = germ sqrt(m|r| / xi(x)) exp(E1 I(x)),  r = x - x0,
//   I(x) = int_0^{|r|} [1/(2 xi) - 1/(2 m t)] dt,   m = sqrt(V''(x0)/2),
// which is C^infty through the well and free of interpolation noise.
struct Wkb1D {
    const PotentialSpec* spec = nullptr;
    double germ = 0.0;
    double m = 0.0;     // = E1 in 1D
    double x_lo = 0.0, x_hi = 0.0;  // validity (strictly inside the island)
    double quad_tol = 1e-13;

    double d(double x) const;
    double a0(double x) const;
    double w(double x, double h) const;  // h^{-1/4} a0 e^{-d/h}
};

Wkb1D wkb_line(const PotentialSpec& spec, double germ, double x_lo, double x_hi);

// |e^{d/h} (P - E0 - E1 h) w| on a probe interval, with P applied by
// second-order finite differences on a fine evaluation grid.
double quasimode_residual(const PotentialSpec& spec, const Wkb1D& wkb, double h, double x_lo,
                          double x_hi, int n_eval = 4000);

}  // namespace resonia
