#pragma once

#include <vector>

#include "resonia/core.hpp"
#include "resonia/potential.hpp"

namespace resonia {

// Grid-sampled scalar data on a uniform grid (1D or 2D, row-major in y).
struct ScalarField {
    Vec origin{};
    double spacing = 0.0;
    int nx = 0, ny = 1;
    int dim = 1;
    std::vector<double> values;
    std::vector<unsigned char> mask;

    size_t idx(int i, int j = 0) const { return size_t(j) * size_t(nx) + size_t(i); }
    Vec point(int i, int j = 0) const {
        return {origin.x + spacing * i, dim == 2 ? origin.y + spacing * j : 0.0};
    }
    double at(int i, int j = 0) const { return values[idx(i, j)]; }
    bool masked(int i, int j = 0) const { return mask[idx(i, j)] != 0; }

    // Bilinear (linear in 1D) interpolation; requires the point in range.
    double interp(Vec p) const;
    bool in_range(Vec p) const;
};

struct GridControls {
    double box = 2.0;        // half-width of the grid around x0
    int resolution = 2048;   // nodes per axis
    double speed_floor = 1e-9;
    int seed_cells = 4;      // harmonic seed ball radius in cells
};

// First-order fast marching for |grad d| = sqrt((V - E0)_+), seeded with the
// exact harmonic quadratic near x0. Mask marks nodes reached by the march.
ScalarField agmon_fast_march(const PotentialSpec& spec, const GridControls& grid);

// Hamilton-flow path of q = xi^2 - V through (x1, 0), integrated backward
// toward the well, with Agmon action and the Jacobi field for caustics.
struct GeodesicPath {
    std::vector<double> times;            // increasing, t = 0 at x1
    std::vector<Vec> x;
    std::vector<Vec> xi;
    std::vector<double> action;           // d(x0, x(t)) along the path
    std::vector<double> jacobian_det;
    double energy_defect = 0.0;           // max |xi^2 - V + E0|
    bool reached_well = false;
};

struct ShootControls {
    double t_span = 60.0;
    double r_stop = 1e-3;       // stop radius around x0
    double rel_tol = 1e-11;
    double abs_tol = 1e-12;
    double dt_init = 1e-3;
    Vec jacobi_seed{};          // 2D: initial transverse direction (boundary tangent)
};

GeodesicPath geodesic_shoot(const PotentialSpec& spec, Vec x1, const ShootControls& ctl = {});

struct InteractionSet {
    double S = 0.0;
    std::vector<Vec> gamma_points;
    int n_gamma = 0;
    std::vector<double> transverse_hessian;  // per cluster, d^2(d|_boundary)/ds^2
    std::vector<int> gamma_boundary_index;   // index into the boundary point list
};

struct ClusterControls {
    double cluster_tol = 0.01;   // relative to S
    double grid_error_scale = 4.0;  // times spacing * typical speed, absolute floor
};

InteractionSet interaction_set(const ScalarField& d, const PotentialSpec& spec,
                               const IslandBoundary& boundary, const ClusterControls& ctl = {});

struct CausticInfo {
    std::vector<Vec> points;         // detected fold points
    std::vector<Vec> tangents;       // local tangent fit (2D; zero in 1D)
    bool interior_empty = true;      // C meets the island closure only at the boundary
    double lemma_constant = 0.0;     // fitted C with phi|_C >= C (V - E0), 0 if not fitted
};

CausticInfo caustic_detect(const std::vector<GeodesicPath>& bundle, const PotentialSpec& spec,
                           const ScalarField* d_field = nullptr, double S = 0.0,
                           double j_tol = 1e-9);

// Agmon distance from x0 to a point by direct quadrature along the straight
// ray (valid for radially monotone islands; used as oracle and for 1D work).
double agmon_ray_quadrature(const PotentialSpec& spec, Vec target, double tol = 1e-12);

}  // namespace resonia
