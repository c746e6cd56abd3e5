#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "resonia/core.hpp"
#include "resonia/eikonal.hpp"
#include "resonia/potential.hpp"

namespace resonia {

// The eigen-solves run in 80-bit extended precision: the widths of interest
// sit 12-13 orders below the eigenvalue scale, which leaves no headroom in
// plain double once matrix norms enter the rounding budget.
using ldcplx = std::complex<long double>;

struct DirichletResult {
    double lambda = 0.0;
    std::vector<double> u;       // eigenvector, L2-normalized (sum |u|^2 dx = 1)
    std::vector<double> x;       // node coordinates
    double spacing = 0.0;
    double residual = 0.0;
};

// Smallest eigenvalue of -h^2 u'' + V u on [a, b] with Dirichlet walls.
DirichletResult dirichlet_ground(const PotentialSpec& spec, double h, double a, double b,
                                 int nodes);

// Function-valued 1D potential (used by the 2D radial reduction, where the
// effective potential carries an h-dependent centrifugal term).
struct Potential1DFns {
    std::function<double(double)> v;
    std::function<cplx(cplx)> vc;
};

DirichletResult dirichlet_ground_fn(const Potential1DFns& pot, double h, double a, double b,
                                    int nodes);

// Convenience: domain = the d < S - eta sublevel interval from the Agmon data.
DirichletResult dirichlet_ground_ball(const PotentialSpec& spec, double h,
                                      const ScalarField& agmon, double S, double eta,
                                      int nodes = 0);

// Exterior-complex-scaled 1D operator, symmetrized second-order stencil.
struct DiscretizedOperator {
    double h = 0.0;
    double theta = 0.0;
    double R0 = 0.0;
    double box = 0.0;
    int nodes = 0;
    double spacing = 0.0;
    std::vector<double> x;           // real nodes
    std::vector<ldcplx> diag;        // symmetrized matrix
    std::vector<ldcplx> off;         // off[i] couples node i and i+1
    std::vector<ldcplx> jac;         // dz/dx at nodes (1 inside R0)

    // The eigenvector of the symmetrized matrix is J^{1/2} u; this undoes it.
    std::vector<cplx> unscale(const std::vector<ldcplx>& v) const;
};

DiscretizedOperator complex_scaled_operator(const PotentialSpec& spec, double h, double theta,
                                            double R0, double box, int nodes);

// Assembly on an arbitrary interval [a, b]; exterior scaling applies where
// |x| > R0 (a half-line radial problem passes a = 0).
DiscretizedOperator complex_scaled_operator_fn(const Potential1DFns& pot, double h, double theta,
                                               double R0, double a, double b, int nodes);

struct ResonanceResult {
    cplx rho;
    double lambda_D = 0.0;
    double h = 0.0, theta = 0.0;
    double residual = 0.0;
    double second_distance = 0.0;  // distance of the next eigenvalue to lambda_D
    std::vector<cplx> u;           // resonant state on the full grid (unscaled form)
    std::vector<double> x;
    double spacing = 0.0;
};

// Complex eigenvalue nearest lambda_D by shift-invert + Rayleigh refinement.
// `S_hint` scales the initial imaginary offset of the shift.
ResonanceResult resonance_near(const DiscretizedOperator& op, double lambda_D, double S_hint);

// Both sides of the discrete Agmon energy identity; returns |LHS-RHS| scaled
// by the magnitude of the RHS terms.
double agmon_identity_check(const std::vector<double>& V, double h, double E,
                            const std::vector<double>& f, const std::vector<double>& phi,
                            double spacing);

struct FbiWindow {
    double x_min = -1.0, x_max = 1.0;
    double xi_min = -2.0, xi_max = 2.0;
    int nx = 64, nxi = 64;
};

struct FbiResult {
    FbiWindow window;
    std::vector<cplx> values;  // row-major in xi
    size_t idx(int i, int j) const { return size_t(j) * size_t(window.nx) + size_t(i); }
};

// Direct quadrature of the Gaussian phase-space transform of a grid function.
FbiResult fbi_transform(const std::vector<cplx>& u, const std::vector<double>& x, double mu,
                        double h, const FbiWindow& window);

}  // namespace resonia
