#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "resonia/core.hpp"

namespace resonia {

// ---------------------------------------------------------------------------
// Quadrature

// Adaptive Simpson on [a,b]; `tol` is an absolute tolerance on the result.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 40);

struct GaussRule {
    std::vector<double> nodes;    // on [-1,1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

// ---------------------------------------------------------------------------
// Dense linear algebra, small systems only.

// Solves A x = b by Gaussian elimination with partial pivoting. A is n*n
// row-major and is destroyed. Throws Error(NumericalFailure) on singularity.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n);

// Least squares min ||A x - b||, A is m*n row-major (m >= n), via normal
// equations. Fine at the sizes used here (n <= ~30) together with scaled bases.
std::vector<double> least_squares(const std::vector<double>& a, const std::vector<double>& b,
                                  int m, int n);

// ---------------------------------------------------------------------------
// Univariate polynomials, coefficient order c[0] + c[1] t + c[2] t^2 + ...

struct Poly {
    std::vector<double> c;

    double eval(double t) const {
        double r = 0.0;
        for (size_t i = c.size(); i-- > 0;) r = r * t + c[i];
        return r;
    }
    std::complex<double> eval(std::complex<double> t) const {
        std::complex<double> r = 0.0;
        for (size_t i = c.size(); i-- > 0;) r = r * t + c[i];
        return r;
    }
    Poly derivative() const {
        Poly d;
        if (c.size() <= 1) return d;
        d.c.resize(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * double(i);
        return d;
    }
    Poly antiderivative() const {
        Poly p;
        p.c.resize(c.size() + 1, 0.0);
        for (size_t i = 0; i < c.size(); ++i) p.c[i + 1] = c[i] / double(i + 1);
        return p;
    }
    int degree() const { return int(c.size()) - 1; }
};

// Least-squares polynomial fit of given degree to samples (t_i, y_i).
Poly polyfit(const std::vector<double>& t, const std::vector<double>& y, int degree);

// ---------------------------------------------------------------------------
// Truncated Taylor series arithmetic over complex coefficients
// (a[0] + a[1] z + ... + a[K] z^K, operations mod z^{K+1}).

struct Series {
    std::vector<cplx> a;

    explicit Series(int n_terms = 1) : a(size_t(std::max(1, n_terms)), cplx(0.0)) {}
    int terms() const { return int(a.size()); }
};

Series series_mul(const Series& f, const Series& g);
// f^p for real exponent p; requires f.a[0] != 0. Uses the ODE (f^p)' f = p f' f^p.
Series series_pow(const Series& f, double p);
// Reciprocal 1/f, f.a[0] != 0.
Series series_recip(const Series& f);
// Composition f(g(z)) with g.a[0] == 0.
Series series_compose(const Series& f, const Series& g);
// Functional inverse: given w(z) with w(0)=0, w'(0)!=0, returns z(w).
Series series_invert(const Series& w);

// ---------------------------------------------------------------------------
// Misc

// Deterministic FNV-1a hash of a byte string, hex-encoded.
std::string fnv1a_hex(const std::string& bytes);

// Chebyshev points of the second kind on [a,b], n of them (n >= 2).
std::vector<double> chebyshev_points(int n, double a, double b);

inline double sq(double v) { return v * v; }

}  // namespace resonia
