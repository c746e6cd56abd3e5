#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace resonia {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Small fixed-size point for 1D/2D work. The active dimension is carried by
// whatever object owns the point (PotentialSpec::dim, ScalarField::dim, ...);
// unused components stay zero.
struct Vec {
    double x = 0.0;
    double y = 0.0;

    double& operator[](int i) { return i == 0 ? x : y; }
    double operator[](int i) const { return i == 0 ? x : y; }
};

inline Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
inline Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
inline Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
inline double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec a) { return std::sqrt(dot(a, a)); }

// 2x2 symmetric matrix (enough for the Hessians this library meets).
struct SymMat2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    Vec apply(Vec v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

    // Eigenvalues in increasing order; for dim==1 only `xx` is meaningful.
    std::array<double, 2> eigenvalues() const {
        double tr = xx + yy;
        double det = xx * yy - xy * xy;
        double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        return {tr / 2.0 - disc, tr / 2.0 + disc};
    }
};

enum class ErrorKind {
    NoWellFound,
    NoBoundary,
    DegenerateBoundary,
    GridTooCoarse,
    DidNotConverge,
    AmbiguousGamma,
    PhaseLaplacianUnstable,
    CoverageGap,
    ChartFitFailed,
    OutsideChart,
    InnerStripUnavailable,
    ContourFailure,
    BandViolation,
    DegenerateSamples,
    ScalingInsideIsland,
    ResolutionError,
    NoIsolatedResonance,
    SurfaceTooClose,
    DegenerateTransverseHessian,
    BadLadder,
    SchemaError,
    VersionError,
    NumericalFailure,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace resonia
