#include "resonia/resonance.hpp"

#include <algorithm>
#include <cmath>

#include "resonia/numerics.hpp"

namespace resonia {

namespace {

// Thomas solve for a complex symmetric tridiagonal system (A - sigma I) v = r.
// diag/off define A; the factorization is recomputed per call (n is small).
std::vector<ldcplx> tridiag_solve(const std::vector<ldcplx>& diag, const std::vector<ldcplx>& off,
                                  ldcplx sigma, std::vector<ldcplx> r) {
    size_t n = diag.size();
    std::vector<ldcplx> c(n), d(n);
    ldcplx b0 = diag[0] - sigma;
    if (std::abs(b0) == 0.0L) b0 = 1e-300L;
    c[0] = off.empty() ? ldcplx(0) : off[0] / b0;
    d[0] = r[0] / b0;
    for (size_t i = 1; i < n; ++i) {
        ldcplx denom = (diag[i] - sigma) - off[i - 1] * c[i - 1];
        if (std::abs(denom) == 0.0L) denom = 1e-300L;
        c[i] = (i + 1 < n) ? off[i] / denom : ldcplx(0);
        d[i] = (r[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for (size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

long double vec_norm(const std::vector<ldcplx>& v) {
    long double s = 0.0L;
    for (auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// Bilinear (unconjugated) product, the natural pairing for complex symmetric
// matrices.
ldcplx bilinear(const std::vector<ldcplx>& a, const std::vector<ldcplx>& b) {
    ldcplx s = 0.0L;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<ldcplx> apply_tridiag(const std::vector<ldcplx>& diag, const std::vector<ldcplx>& off,
                                  const std::vector<ldcplx>& v) {
    size_t n = diag.size();
    std::vector<ldcplx> w(n);
    for (size_t i = 0; i < n; ++i) {
        ldcplx s = diag[i] * v[i];
        if (i > 0) s += off[i - 1] * v[i - 1];
        if (i + 1 < n) s += off[i] * v[i + 1];
        w[i] = s;
    }
    return w;
}

struct EigPair {
    ldcplx value;
    std::vector<ldcplx> vec;
    long double residual;
};

// Shift-invert iteration with Rayleigh-quotient refinement. `avoid` holds
// already-found eigenvectors to deflate against (bilinear projection).
EigPair eigen_near(const std::vector<ldcplx>& diag, const std::vector<ldcplx>& off, ldcplx sigma,
                   const std::vector<std::vector<ldcplx>>* avoid = nullptr) {
    size_t n = diag.size();
    std::vector<ldcplx> v(n);
    // Deterministic pseudo-random start keeps runs reproducible.
    unsigned long long sseed = 88172645463325252ull;
    for (auto& z : v) {
        sseed ^= sseed << 13;
        sseed ^= sseed >> 7;
        sseed ^= sseed << 17;
        z = ldcplx(1.0L + (long double)(sseed % 1000) / 1000.0L, 0.0L);
    }
    auto deflate = [&](std::vector<ldcplx>& w) {
        if (!avoid) return;
        for (const auto& u : *avoid) {
            ldcplx proj = bilinear(u, w) / bilinear(u, u);
            for (size_t i = 0; i < n; ++i) w[i] -= proj * u[i];
        }
    };
    deflate(v);
    long double nv = vec_norm(v);
    for (auto& z : v) z /= nv;

    ldcplx mu = sigma;
    long double res = 1e30L;
    for (int it = 0; it < 60; ++it) {
        std::vector<ldcplx> w = tridiag_solve(diag, off, it < 2 ? sigma : mu, v);
        deflate(w);
        long double nw = vec_norm(w);
        if (!(nw > 0.0L)) break;
        for (auto& z : w) z /= nw;
        v = std::move(w);
        // Rayleigh quotient with the bilinear form.
        std::vector<ldcplx> av = apply_tridiag(diag, off, v);
        ldcplx vv = bilinear(v, v);
        if (std::abs(vv) < 1e-12L) {
            // Near self-orthogonal vector: fall back to the Hermitian quotient.
            ldcplx num = 0.0L;
            long double den = 0.0L;
            for (size_t i = 0; i < n; ++i) {
                num += std::conj(v[i]) * av[i];
                den += std::norm(v[i]);
            }
            mu = num / den;
        } else {
            mu = bilinear(v, av) / vv;
        }
        long double r = 0.0L;
        for (size_t i = 0; i < n; ++i) r += std::norm(av[i] - mu * v[i]);
        long double prev = res;
        res = std::sqrt(r);
        if (res < 1e-15L * std::abs(mu) + 1e-20L) break;
        if (it > 6 && res > 0.5L * prev) break;  // stagnated at the rounding floor
    }
    return {mu, std::move(v), res};
}

}  // namespace

// ---------------------------------------------------------------------------

DirichletResult dirichlet_ground_fn(const Potential1DFns& pot, double h, double a, double b,
                                    int nodes) {
    if (nodes < 16) throw Error(ErrorKind::ResolutionError, "too few nodes");
    double dx = (b - a) / double(nodes + 1);
    double vmax = 0.0;
    DirichletResult out;
    out.spacing = dx;
    out.x.resize(size_t(nodes));
    std::vector<ldcplx> diag(size_t(nodes)), off(size_t(nodes) - 1);
    long double k = (long double)(h) * h / ((long double)dx * dx);
    for (int i = 0; i < nodes; ++i) {
        double xi = a + dx * (i + 1);
        out.x[size_t(i)] = xi;
        double v = pot.v(xi);
        vmax = std::max(vmax, v);
        diag[size_t(i)] = 2.0L * k + (long double)v;
        if (i + 1 < nodes) off[size_t(i)] = -k;
    }
    if (dx > h / (10.0 * std::sqrt(std::max(vmax, 1e-10))))
        throw Error(ErrorKind::ResolutionError, "spacing does not resolve the wavelength");

    // The ground state sits near min V; shift-invert from just below it.
    double vmin = 1e300;
    for (int i = 0; i < nodes; ++i) vmin = std::min(vmin, (double)diag[size_t(i)].real() - 2.0 * (double)k);
    EigPair p = eigen_near(diag, off, ldcplx((long double)vmin, 0.0L));
    out.lambda = (double)p.value.real();
    out.residual = (double)p.residual;
    out.u.resize(size_t(nodes));
    // Real eigenvector, sign fixed positive at the max-|u| node, L2-normalized.
    size_t imax = 0;
    for (size_t i = 0; i < p.vec.size(); ++i)
        if (std::abs(p.vec[i]) > std::abs(p.vec[imax])) imax = i;
    long double phase = p.vec[imax].real() >= 0.0L ? 1.0L : -1.0L;
    long double nrm = 0.0L;
    for (auto& z : p.vec) nrm += std::norm(z);
    nrm = std::sqrt(nrm * (long double)dx);
    for (size_t i = 0; i < p.vec.size(); ++i) out.u[i] = double(phase * p.vec[i].real() / nrm);
    return out;
}

DirichletResult dirichlet_ground(const PotentialSpec& spec, double h, double a, double b,
                                 int nodes) {
    Potential1DFns pot;
    pot.v = [&spec](double x) { return spec.value({x, 0.0}); };
    pot.vc = [&spec](cplx z) { return spec.value_complex(z); };
    return dirichlet_ground_fn(pot, h, a, b, nodes);
}

DirichletResult dirichlet_ground_ball(const PotentialSpec& spec, double h,
                                      const ScalarField& agmon, double S, double eta,
                                      int nodes) {
    // Find the interval where d < S - eta around x0 (1D).
    double target = S - eta;
    double a = spec.x0.x, b = spec.x0.x;
    for (int i = int(std::round((spec.x0.x - agmon.origin.x) / agmon.spacing)); i > 0; --i) {
        if (agmon.at(i) >= target) {
            a = agmon.point(i).x;
            break;
        }
    }
    for (int i = int(std::round((spec.x0.x - agmon.origin.x) / agmon.spacing)); i < agmon.nx - 1;
         ++i) {
        if (agmon.at(i) >= target) {
            b = agmon.point(i).x;
            break;
        }
    }
    if (!(b > a)) throw Error(ErrorKind::ResolutionError, "degenerate Dirichlet ball");
    if (nodes == 0) {
        double vmax = 0.0;
        for (int i = 0; i < 64; ++i)
            vmax = std::max(vmax, spec.value({a + (b - a) * i / 63.0, 0.0}));
        double dx_needed = h / (10.0 * std::sqrt(std::max(vmax, 0.1)));
        nodes = std::min(8000, std::max(64, int((b - a) / dx_needed) + 1));
    }
    return dirichlet_ground(spec, h, a, b, nodes);
}

// ---------------------------------------------------------------------------

namespace {

// C^3 ramp: 0 at t<=0, 1 at t>=1, first three derivatives vanish at both ends.
double ramp_c3(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double t4 = t * t * t * t;
    return t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

}  // namespace

DiscretizedOperator complex_scaled_operator_fn(const Potential1DFns& pot, double h, double theta,
                                               double R0, double a, double b, int nodes) {
    DiscretizedOperator op;
    op.h = h;
    op.theta = theta;
    op.R0 = R0;
    op.box = b;
    op.nodes = nodes;
    op.spacing = (b - a) / double(nodes + 1);

    // Scaling path z(x) = x + i tan(theta) F(x): the far-field kinetic symbol
    // becomes xi^2 e^{-2 i theta} exactly, so the rotated continuum lies on
    // the e^{-2 i theta} R_+ ray.
    double td = std::tan(theta);
    auto Fval = [&](double x) {
        double ax = std::abs(x);
        double t = (ax - R0) / (0.5 * R0);
        return x * ramp_c3(t);
    };
    auto zfun = [&](double x) { return cplx(x, td * Fval(x)); };
    auto dz = [&](double x) {
        // F = x s(t(|x|)), so F' = s + |x| s'(t) / (R0/2).
        double ax = std::abs(x);
        double t = (ax - R0) / (0.5 * R0);
        double s = ramp_c3(t);
        double dsdt = 0.0;
        if (t > 0.0 && t < 1.0) {
            double t3 = t * t * t;
            dsdt = t3 * (140.0 - 420.0 * t + 420.0 * t * t - 140.0 * t * t * t);
        }
        double dF = s + ax * dsdt / (0.5 * R0);
        return cplx(1.0, td * dF);
    };

    op.x.resize(size_t(nodes));
    op.diag.resize(size_t(nodes));
    op.off.assign(size_t(nodes) - 1, ldcplx(0));
    op.jac.resize(size_t(nodes));
    long double dx = (long double)op.spacing;
    long double hh = (long double)h * h;
    std::vector<ldcplx> jfull(size_t(nodes) + 2);
    for (int i = 0; i <= nodes + 1; ++i) {
        double xi = a + op.spacing * i;
        cplx j = dz(xi);
        jfull[size_t(i)] = ldcplx(j.real(), j.imag());
    }
    for (int i = 0; i < nodes; ++i) {
        double xi = a + op.spacing * (i + 1);
        op.x[size_t(i)] = xi;
        op.jac[size_t(i)] = jfull[size_t(i) + 1];
        cplx z = zfun(xi);
        cplx v = theta == 0.0 ? cplx(pot.v(xi), 0.0) : pot.vc(z);
        // Symmetrized stencil for -(h^2/J) d/dx (1/J) d/dx:
        //   A_{i,i+-1} = -h^2 / (dx^2 Jmid sqrt(J_i J_{i+-1}))
        //   A_{ii}     = +h^2 (1/Jlo + 1/Jhi) / (dx^2 J_i) + V(z_i)
        ldcplx Ji = jfull[size_t(i) + 1];
        ldcplx Jlo = 0.5L * (jfull[size_t(i)] + Ji);
        ldcplx Jhi = 0.5L * (Ji + jfull[size_t(i) + 2]);
        op.diag[size_t(i)] = hh / (dx * dx) * (1.0L / Jlo + 1.0L / Jhi) / Ji +
                             ldcplx(v.real(), v.imag());
        if (i + 1 < nodes) {
            ldcplx Jn = jfull[size_t(i) + 2];
            op.off[size_t(i)] = -hh / (dx * dx * Jhi * std::sqrt(Ji * Jn));
        }
    }
    return op;
}

DiscretizedOperator complex_scaled_operator(const PotentialSpec& spec, double h, double theta,
                                            double R0, double box, int nodes) {
    if (!spec.well_located)
        throw Error(ErrorKind::NoWellFound, "complex_scaled_operator requires find_well");
    if (spec.dim != 1)
        throw Error(ErrorKind::NumericalFailure, "eigen-solves are 1D (use the radial reduction)");
    IslandBoundary bdy = island_boundary(spec);
    if (bdy.radius_estimate + 1e-9 >= R0)
        throw Error(ErrorKind::ScalingInsideIsland, "R0 intersects the island");
    if (box < 3.0 * R0 - 1e-12)
        throw Error(ErrorKind::ResolutionError, "box must be at least 3 R0");
    Potential1DFns pot;
    pot.v = [&spec](double x) { return spec.value({x, 0.0}); };
    pot.vc = [&spec](cplx z) { return spec.value_complex(z); };
    return complex_scaled_operator_fn(pot, h, theta, R0, -box, box, nodes);
}

std::vector<cplx> DiscretizedOperator::unscale(const std::vector<ldcplx>& v) const {
    std::vector<cplx> u(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        ldcplx w = v[i] / std::sqrt(jac[i]);
        u[i] = cplx(double(w.real()), double(w.imag()));
    }
    return u;
}

ResonanceResult resonance_near(const DiscretizedOperator& op, double lambda_D, double S_hint) {
    ResonanceResult rr;
    rr.h = op.h;
    rr.theta = op.theta;
    rr.lambda_D = lambda_D;
    rr.x = op.x;
    rr.spacing = op.spacing;

    double width_guess = std::exp(-2.0 * S_hint / op.h);
    ldcplx sigma((long double)lambda_D, -(long double)std::max(width_guess, 1e-300));
    EigPair p = eigen_near(op.diag, op.off, sigma);
    long double scale = 0.0L;
    for (auto& d : op.diag) scale = std::max(scale, std::abs(d));
    rr.residual = double(p.residual / std::max(scale, 1.0L));
    rr.rho = cplx(double(p.value.real()), double(p.value.imag()));

    // Uniqueness audit: deflate and look for a second eigenvalue near lambda_D.
    std::vector<std::vector<ldcplx>> found{p.vec};
    EigPair q = eigen_near(op.diag, op.off, sigma, &found);
    rr.second_distance = double(std::abs(q.value - (long double)lambda_D));
    if (rr.second_distance < op.h / 4.0)
        throw Error(ErrorKind::NoIsolatedResonance,
                    "second eigenvalue within h/4 of the Dirichlet level");
    if (!(rr.rho.imag() < 0.0))
        throw Error(ErrorKind::NoIsolatedResonance, "computed resonance has Im >= 0");

    rr.u = op.unscale(p.vec);
    return rr;
}

// ---------------------------------------------------------------------------

double agmon_identity_check(const std::vector<double>& V, double h, double E,
                            const std::vector<double>& f, const std::vector<double>& phi,
                            double spacing) {
    size_t n = V.size();
    std::vector<double> g(n);  // e^{phi/h} f
    for (size_t i = 0; i < n; ++i) g[i] = std::exp(phi[i] / h) * f[i];

    // LHS = sum e^{phi/h} [(-h^2 Lap + V - E) f] g dx, Dirichlet ends.
    double lhs = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double fm = i > 0 ? f[i - 1] : 0.0;
        double fp = i + 1 < n ? f[i + 1] : 0.0;
        double lap = (fp - 2.0 * f[i] + fm) / (spacing * spacing);
        lhs += (std::exp(phi[i] / h) * (-h * h * lap + (V[i] - E) * f[i])) * g[i] * spacing;
    }
    // RHS = ||h D g||^2 + sum (V - E - |Dc phi|^2) g^2 dx, with the forward
    // difference D (summation-by-parts partner of the 3-point Laplacian) and
    // the same forward difference for the weight gradient.
    double rhs = 0.0, quad = 0.0;
    for (size_t i = 0; i + 1 <= n; ++i) {
        double gp = i + 1 < n ? g[i + 1] : 0.0;
        double gc = g[i];
        double diff = (gp - gc) / spacing;
        rhs += h * h * diff * diff * spacing;
    }
    // Leading boundary segment (from the implicit zero node before index 0).
    rhs += h * h * (g[0] / spacing) * (g[0] / spacing) * spacing;
    for (size_t i = 0; i < n; ++i) {
        double php = i + 1 < n ? phi[i + 1] : phi[i];
        double phm = i > 0 ? phi[i - 1] : phi[i];
        double dphi = (php - phm) / (2.0 * spacing);
        quad += (V[i] - E - dphi * dphi) * g[i] * g[i] * spacing;
    }
    double scale = std::abs(rhs) + std::abs(quad) + std::abs(lhs) + 1e-30;
    return std::abs(lhs - (rhs + quad)) / scale;
}

// ---------------------------------------------------------------------------

FbiResult fbi_transform(const std::vector<cplx>& u, const std::vector<double>& x, double mu,
                        double h, const FbiWindow& window) {
    FbiResult res;
    res.window = window;
    res.values.assign(size_t(window.nx) * size_t(window.nxi), cplx(0.0));
    double dx = x.size() > 1 ? x[1] - x[0] : 1.0;
    double cmu = std::pow(mu, 0.25) * std::pow(2.0, -0.5) * std::pow(kPi * h, -0.75);
    for (int j = 0; j < window.nxi; ++j) {
        double xi = window.xi_min + (window.xi_max - window.xi_min) * j /
                        std::max(1, window.nxi - 1);
        for (int i = 0; i < window.nx; ++i) {
            double xx = window.x_min + (window.x_max - window.x_min) * i /
                            std::max(1, window.nx - 1);
            cplx acc = 0.0;
            for (size_t k = 0; k < x.size(); ++k) {
                double dxy = xx - x[k];
                cplx phase(-mu * dxy * dxy / (2.0 * h), dxy * xi / h);
                acc += std::exp(phase) * u[k];
            }
            res.values[res.idx(i, j)] = cmu * acc * dx;
        }
    }
    return res;
}

}  // namespace resonia
