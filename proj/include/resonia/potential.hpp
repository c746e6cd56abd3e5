#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resonia/core.hpp"

namespace resonia {

enum class Family { GaussWell, PolyGauss, SumGauss };

Family family_from_name(const std::string& name);
std::string family_name(Family f);

// Parametric analytic potential. All built-in families are entire functions of
// x, so gradients and Hessians are coded in closed form and 1D members accept
// complex arguments (needed by the exterior scaling).
struct PotentialSpec {
    Family family = Family::GaussWell;
    std::map<std::string, double> params;
    int dim = 1;

    // Filled in by find_well:
    Vec x0{};
    double E0 = 0.0;
    bool well_located = false;

    double value(Vec p) const;
    Vec gradient(Vec p) const;
    SymMat2 hessian(Vec p) const;
    cplx value_complex(cplx z) const;  // dim == 1 only

    double param(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

PotentialSpec make_spec(const std::string& family, const std::map<std::string, double>& params,
                        int dim);

struct WellData {
    Vec x0;
    double E0 = 0.0;
    SymMat2 hessian;
};

// Newton iteration on grad V from `guess`; validates an SPD Hessian and E0 > 0.
WellData find_well(PotentialSpec& spec, Vec guess = {});

// E1 = sum of sqrt of eigenvalues of Hessian/2 (harmonic ground-state slope).
double harmonic_data(const PotentialSpec& spec);

struct IslandBoundary {
    // 1D: two points (x-, x+) bracketing the well. 2D: closed polyline, CCW.
    std::vector<Vec> points;
    std::vector<Vec> outward_normals;  // unit, V decreasing along them
    double radius_estimate = 0.0;      // max distance from x0
};

struct BoundaryOptions {
    double search_radius = 8.0;
    int grid_n = 512;        // 2D marching grid
    double refine_tol = 1e-10;
};

IslandBoundary island_boundary(const PotentialSpec& spec, const BoundaryOptions& opt = {});

struct BoundaryFrame {
    Vec x1;
    Vec normal;         // unit exterior normal
    Vec tangent;        // unit tangent (2D; zero in 1D)
    double C0 = 0.0;    // |grad V(x1)|
    int dim = 1;

    // Frame coordinates: xn along `normal`, xp along `tangent`.
    Vec to_frame(Vec p) const;     // returns {xp, xn} packed as {x, y} -> (x', x_n)
    Vec from_frame(double xp, double xn) const;

    // W(x) = V(x) - E0 + C0 * x_n in frame coordinates (quadratic remainder).
    double w_residual(const PotentialSpec& spec, double xp, double xn) const;
};

BoundaryFrame boundary_frame(const PotentialSpec& spec, Vec x1);

struct AssumptionReport {
    bool a1_pass = false;
    double a1_decay_exponent = 0.0;
    bool a2_pass = false;
    std::string a2_note;
    bool a3_pass = false;
    int a3_escaped = 0;
    int a3_samples = 0;
    bool a4_pass = false;
    std::string a4_note;
    bool all() const { return a1_pass && a2_pass && a3_pass && a4_pass; }
};

struct AssumptionBudget {
    int phase_space_samples = 64;
    double escape_radius = 10.0;
    double time_budget = 200.0;
    unsigned long long seed = 1;
};

AssumptionReport validate_assumptions(PotentialSpec spec, const AssumptionBudget& budget = {});

}  // namespace resonia
