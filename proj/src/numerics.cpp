#include "resonia/numerics.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace resonia {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::NoWellFound: return "NoWellFound";
        case ErrorKind::NoBoundary: return "NoBoundary";
        case ErrorKind::DegenerateBoundary: return "DegenerateBoundary";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::DidNotConverge: return "DidNotConverge";
        case ErrorKind::AmbiguousGamma: return "AmbiguousGamma";
        case ErrorKind::PhaseLaplacianUnstable: return "PhaseLaplacianUnstable";
        case ErrorKind::CoverageGap: return "CoverageGap";
        case ErrorKind::ChartFitFailed: return "ChartFitFailed";
        case ErrorKind::OutsideChart: return "OutsideChart";
        case ErrorKind::InnerStripUnavailable: return "InnerStripUnavailable";
        case ErrorKind::ContourFailure: return "ContourFailure";
        case ErrorKind::BandViolation: return "BandViolation";
        case ErrorKind::DegenerateSamples: return "DegenerateSamples";
        case ErrorKind::ScalingInsideIsland: return "ScalingInsideIsland";
        case ErrorKind::ResolutionError: return "ResolutionError";
        case ErrorKind::NoIsolatedResonance: return "NoIsolatedResonance";
        case ErrorKind::SurfaceTooClose: return "SurfaceTooClose";
        case ErrorKind::DegenerateTransverseHessian: return "DegenerateTransverseHessian";
        case ErrorKind::BadLadder: return "BadLadder";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::VersionError: return "VersionError";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
    }
    return "UnknownError";
}

// ---------------------------------------------------------------------------

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(size_t(n));
    rule.weights.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, Newton on P_n.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[size_t(i)] = x;
        rule.weights[size_t(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// ---------------------------------------------------------------------------

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[size_t(r) * n + col]) > std::abs(a[size_t(piv) * n + col])) piv = r;
        if (std::abs(a[size_t(piv) * n + col]) < 1e-300)
            throw Error(ErrorKind::NumericalFailure, "singular matrix in solve_dense");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[size_t(piv) * n + c], a[size_t(col) * n + c]);
            std::swap(b[size_t(piv)], b[size_t(col)]);
        }
        double d = a[size_t(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = a[size_t(r) * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[size_t(r) * n + c] -= f * a[size_t(col) * n + c];
            b[size_t(r)] -= f * b[size_t(col)];
        }
    }
    std::vector<double> x(size_t(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[size_t(r)];
        for (int c = r + 1; c < n; ++c) s -= a[size_t(r) * n + c] * x[size_t(c)];
        x[size_t(r)] = s / a[size_t(r) * n + r];
    }
    return x;
}

std::vector<double> least_squares(const std::vector<double>& a, const std::vector<double>& b,
                                  int m, int n) {
    std::vector<double> ata(size_t(n) * n, 0.0), atb(size_t(n), 0.0);
    for (int r = 0; r < m; ++r) {
        for (int i = 0; i < n; ++i) {
            double ari = a[size_t(r) * n + i];
            if (ari == 0.0) continue;
            atb[size_t(i)] += ari * b[size_t(r)];
            for (int j = i; j < n; ++j) ata[size_t(i) * n + j] += ari * a[size_t(r) * n + j];
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) ata[size_t(i) * n + j] = ata[size_t(j) * n + i];
    // Tikhonov whisper keeps near-rank-deficient fits solvable.
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += ata[size_t(i) * n + i];
    for (int i = 0; i < n; ++i) ata[size_t(i) * n + i] += 1e-14 * (trace / n + 1.0);
    return solve_dense(std::move(ata), std::move(atb), n);
}

Poly polyfit(const std::vector<double>& t, const std::vector<double>& y, int degree) {
    int m = int(t.size()), n = degree + 1;
    // Scale the variable to [-1,1] internally? Keep it simple: callers here fit
    // on O(1) windows, plain monomials are adequate with the regularized solve.
    std::vector<double> a(size_t(m) * n);
    for (int r = 0; r < m; ++r) {
        double p = 1.0;
        for (int c = 0; c < n; ++c) {
            a[size_t(r) * n + c] = p;
            p *= t[size_t(r)];
        }
    }
    Poly out;
    out.c = least_squares(a, y, m, n);
    return out;
}

// ---------------------------------------------------------------------------

Series series_mul(const Series& f, const Series& g) {
    int n = std::max(f.terms(), g.terms());
    Series h(n);
    for (int i = 0; i < f.terms(); ++i) {
        if (f.a[size_t(i)] == cplx(0.0)) continue;
        for (int j = 0; j < g.terms() && i + j < n; ++j)
            h.a[size_t(i + j)] += f.a[size_t(i)] * g.a[size_t(j)];
    }
    return h;
}

Series series_recip(const Series& f) {
    int n = f.terms();
    Series g(n);
    if (f.a[0] == cplx(0.0))
        throw Error(ErrorKind::NumericalFailure, "series_recip needs nonzero constant term");
    g.a[0] = 1.0 / f.a[0];
    for (int k = 1; k < n; ++k) {
        cplx s = 0.0;
        for (int j = 1; j <= k && j < f.terms(); ++j) s += f.a[size_t(j)] * g.a[size_t(k - j)];
        g.a[size_t(k)] = -s / f.a[0];
    }
    return g;
}

Series series_pow(const Series& f, double p) {
    int n = f.terms();
    if (f.a[0] == cplx(0.0))
        throw Error(ErrorKind::NumericalFailure, "series_pow needs nonzero constant term");
    // g = f^p via g' f = p f' g, coefficient recurrence.
    Series g(n);
    g.a[0] = std::pow(f.a[0], cplx(p));
    for (int k = 1; k < n; ++k) {
        cplx s = 0.0;
        for (int j = 1; j <= k && j < f.terms(); ++j) {
            cplx term = f.a[size_t(j)] * g.a[size_t(k - j)];
            s += (p * double(j) - double(k - j)) * term;
        }
        g.a[size_t(k)] = s / (double(k) * f.a[0]);
    }
    return g;
}

Series series_compose(const Series& f, const Series& g) {
    if (g.a[0] != cplx(0.0))
        throw Error(ErrorKind::NumericalFailure, "series_compose needs g(0)=0");
    int n = std::max(f.terms(), g.terms());
    Series acc(n), gp(n);
    gp.a[0] = 1.0;
    for (int k = 0; k < f.terms(); ++k) {
        for (int i = 0; i < n; ++i) acc.a[size_t(i)] += f.a[size_t(k)] * gp.a[size_t(i)];
        gp = series_mul(gp, g);
    }
    return acc;
}

Series series_invert(const Series& w) {
    if (w.a[0] != cplx(0.0) || w.terms() < 2 || w.a[1] == cplx(0.0))
        throw Error(ErrorKind::NumericalFailure, "series_invert needs w(0)=0, w'(0)!=0");
    int n = w.terms();
    Series z(n);  // z(w) with z.a[1] = 1/w'(0)
    z.a[1] = 1.0 / w.a[1];
    for (int k = 2; k < n; ++k) {
        // Match coefficient of w^k in z(w(t)) = t: iteratively refine.
        Series trial = z;
        Series comp = series_compose(trial, w);
        // comp should be t; the first discrepancy sits at order k.
        cplx err = comp.a[size_t(k)];
        z.a[size_t(k)] = -err * std::pow(z.a[1], double(k));
        // One correction step is exact because lower orders already match and
        // the k-th coefficient enters linearly through (w.a[1])^k.
    }
    return z;
}

// ---------------------------------------------------------------------------

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::vector<double> chebyshev_points(int n, double a, double b) {
    std::vector<double> pts(size_t(n));
    for (int k = 0; k < n; ++k) {
        double t = std::cos(kPi * double(k) / double(n - 1));
        pts[size_t(k)] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    }
    return pts;
}

}  // namespace resonia
