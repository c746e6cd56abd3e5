#include "resonia/caustic.hpp"

#include <algorithm>
#include <cmath>

namespace resonia {

// ---------------------------------------------------------------------------
// Holomorphic approximation

namespace {

double smooth_cutoff(double s) {
    // 1 for s <= 1, 0 for s >= 2, C^infty in between.
    s = std::abs(s);
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    auto sigma = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    double up = sigma(2.0 - s);
    double dn = sigma(s - 1.0);
    return up / (up + dn);
}

// Chebyshev interpolant helpers (second-kind points).
std::vector<double> cheb_barycentric_weights(int n) {
    std::vector<double> w(size_t(n));
    for (int k = 0; k < n; ++k) {
        w[size_t(k)] = (k % 2 == 0 ? 1.0 : -1.0);
        if (k == 0 || k == n - 1) w[size_t(k)] *= 0.5;
    }
    return w;
}

Poly cheb_to_poly(const std::vector<double>& nodes, const std::vector<double>& vals) {
    // Newton divided differences, then expand; adequate at the sizes used.
    size_t n = nodes.size();
    std::vector<double> dd = vals;
    for (size_t j = 1; j < n; ++j)
        for (size_t i = n - 1; i >= j; --i)
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
    Poly p;
    p.c = {dd[n - 1]};
    for (size_t i = n - 1; i-- > 0;) {
        // p <- p * (x - nodes[i]) + dd[i]
        Poly q;
        q.c.assign(p.c.size() + 1, 0.0);
        for (size_t k = 0; k < p.c.size(); ++k) {
            q.c[k + 1] += p.c[k];
            q.c[k] -= nodes[i] * p.c[k];
        }
        q.c[0] += dd[i];
        p = std::move(q);
    }
    return p;
}

}  // namespace

cplx HoloApprox::operator()(cplx z) const {
    if (mode_ == HoloMode::ChebyshevA) {
        // Barycentric evaluation; exact hit on a node returns the node value.
        cplx num = 0.0, den = 0.0;
        for (size_t k = 0; k < nodes_.size(); ++k) {
            cplx dz = z - nodes_[k];
            if (std::abs(dz) < 1e-15) return fvals_[k];
            cplx t = bary_w_[k] / dz;
            num += t * fvals_[k];
            den += t;
        }
        return num / den;
    }
    // Mode B: truncated Taylor almost-analytic extension.
    double x = z.real(), y = z.imag();
    cplx acc = 0.0;
    cplx iy(0.0, y);
    cplx pw = 1.0;
    double fact = 1.0;
    for (size_t al = 0; al < derivs_.size(); ++al) {
        double gate = al == 0 ? 1.0 : 1.0 - smooth_cutoff(eps_[al] / std::max(std::abs(y), 1e-300));
        if (gate != 0.0) acc += pw / fact * derivs_[al].eval(x) * gate;
        pw *= iy;
        fact *= double(al + 1);
    }
    return acc;
}

HoloApprox holomorphic_approx(const std::function<double(double)>& f, double a, double b,
                              double delta, HoloMode mode, int n_nodes, int taylor_order) {
    if (!(b > a)) throw Error(ErrorKind::DegenerateSamples, "empty interval");
    HoloApprox h;
    h.mode_ = mode;
    h.a_ = a;
    h.b_ = b;
    h.delta_ = delta;
    h.nodes_ = chebyshev_points(n_nodes, a, b);
    h.fvals_.resize(h.nodes_.size());
    for (size_t k = 0; k < h.nodes_.size(); ++k) h.fvals_[k] = f(h.nodes_[k]);
    h.bary_w_ = cheb_barycentric_weights(n_nodes);

    if (mode == HoloMode::TaylorB) {
        Poly p = cheb_to_poly(h.nodes_, h.fvals_);
        h.derivs_.clear();
        h.eps_.clear();
        Poly d = p;
        double factorial = 1.0;
        std::vector<double> sup;  // sup |f^(k)| on [a,b] by dense sampling
        for (int k = 0; k <= taylor_order + taylor_order; ++k) {
            double m = 0.0;
            for (int s = 0; s <= 64; ++s)
                m = std::max(m, std::abs(d.eval(a + (b - a) * s / 64.0)));
            sup.push_back(m);
            d = d.derivative();
        }
        d = p;
        for (int k = 0; k <= taylor_order; ++k) {
            h.derivs_.push_back(d);
            double msup = 0.0;
            for (int be = 0; be <= k && k + be < int(sup.size()); ++be)
                msup = std::max(msup, sup[size_t(k + be)]);
            h.eps_.push_back(k == 0 ? 1e300 : factorial / std::max(msup, 1e-300));
            d = d.derivative();
            factorial *= double(k + 1);
        }
    }

    // Real-axis error by dense sampling between nodes.
    double err = 0.0;
    for (int s = 0; s <= 257; ++s) {
        double x = a + (b - a) * s / 257.0;
        err = std::max(err, std::abs(h(cplx(x, 0.0)).real() - f(x)));
    }
    h.axis_err_ = err;
    return h;
}

// ---------------------------------------------------------------------------
// Chart fitting

namespace {

std::vector<cplx> taylor_at(const Poly& p, cplx center, int terms) {
    std::vector<cplx> out;
    Poly d = p;
    double fact = 1.0;
    for (int k = 0; k < terms; ++k) {
        out.push_back(d.eval(center) / fact);
        d = d.derivative();
        fact *= double(k + 1);
    }
    return out;
}

}  // namespace

LagrangianChart fit_chart(const PotentialSpec& spec, Vec x1, const ChartControls& ctl) {
    if (spec.dim != 1)
        throw Error(ErrorKind::ChartFitFailed,
                    "chart fitting is one-dimensional; reduce 2D radial data first");
    LagrangianChart chart;
    chart.frame = boundary_frame(spec, x1);

    // Hamilton flow through (x1, 0), both time directions, frame coordinates.
    // RK4 with a small fixed step is plenty here (the fit smooths anyway and
    // the step error is far below the fit residual target).
    auto flow = [&](double dir, std::vector<double>& xis, std::vector<double>& xns) {
        double x = x1.x, xi = 0.0;
        double dt = 2e-4 * dir;
        double xi_peak = 0.0;
        auto fx = [&](double xx) { return spec.gradient({xx, 0.0}).x; };
        for (int step = 0; step * std::abs(dt) < ctl.t_span; ++step) {
            double k1x = 2.0 * xi, k1v = fx(x);
            double k2x = 2.0 * (xi + 0.5 * dt * k1v), k2v = fx(x + 0.5 * dt * k1x);
            double k3x = 2.0 * (xi + 0.5 * dt * k2v), k3v = fx(x + 0.5 * dt * k2x);
            double k4x = 2.0 * (xi + dt * k3v), k4v = fx(x + dt * k3x);
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            xi += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            double xin = xi * chart.frame.normal.x;
            double xnn = (x - x1.x) * chart.frame.normal.x;
            if (std::abs(xin) < xi_peak * 0.999) break;  // xi no longer monotone
            xi_peak = std::max(xi_peak, std::abs(xin));
            xis.push_back(xin);
            xns.push_back(xnn);
        }
    };
    std::vector<double> xis, xns;
    flow(-1.0, xis, xns);
    flow(+1.0, xis, xns);
    if (xis.size() < 40) throw Error(ErrorKind::ChartFitFailed, "too few flow samples");

    double xi_max = 0.0;
    for (double v : xis) xi_max = std::max(xi_max, std::abs(v));
    double keep = ctl.xi_keep_fraction * xi_max;
    std::vector<double> fx_t, fy_t;
    for (size_t k = 0; k < xis.size(); ++k) {
        if (std::abs(xis[k]) <= keep) {
            fx_t.push_back(xis[k]);
            fy_t.push_back(-xns[k]);
        }
    }
    chart.xi_data_max = keep;

    // Time reversal sends (x(t), xi(t)) to (x(-t), -xi(-t)) through (x1, 0),
    // so x_n is exactly even in xi_n and vanishes at xi_n = 0: fit with the
    // even zero-constant basis xi^2, xi^4, ... This pins xi_c = a = b = 0
    // structurally and keeps the outgoing phase real part at exact zero.
    int m_basis = std::max(2, ctl.fit_degree / 2);
    {
        std::vector<double> A(fx_t.size() * size_t(m_basis));
        for (size_t r = 0; r < fx_t.size(); ++r) {
            double q = fx_t[r] * fx_t[r];
            double p = q;
            for (int c = 0; c < m_basis; ++c) {
                A[r * size_t(m_basis) + size_t(c)] = p;
                p *= q;
            }
        }
        std::vector<double> coef = least_squares(A, fy_t, int(fx_t.size()), m_basis);
        chart.F.c.assign(size_t(2 * m_basis + 1), 0.0);
        for (int c = 0; c < m_basis; ++c) chart.F.c[size_t(2 * c + 2)] = coef[size_t(c)];
    }
    chart.g = chart.F.antiderivative();

    double resid = 0.0, scale = 0.0;
    for (size_t k = 0; k < fx_t.size(); ++k) {
        resid = std::max(resid, std::abs(chart.F.eval(fx_t[k]) - fy_t[k]));
        scale = std::max(scale, std::abs(fy_t[k]));
    }
    chart.fit_residual = resid;
    if (resid > ctl.fit_tol * std::max(scale, 1e-6))
        throw Error(ErrorKind::ChartFitFailed, "flow data is not a fold graph at this tolerance");

    chart.xi_c = 0.0;
    chart.b = 0.0;
    chart.a_val = 0.0;
    chart.nu1_c = chart.F.c[2];
    if (!(chart.nu1_c > 0.0))
        throw Error(ErrorKind::ChartFitFailed, "fold curvature is not positive");

    chart.nu1_taylor = Series(2 * m_basis - 1);
    for (int j = 0; 2 * j + 2 < int(chart.F.c.size()) && 2 * j < chart.nu1_taylor.terms(); ++j)
        chart.nu1_taylor.a[size_t(2 * j)] = chart.F.c[size_t(2 * j + 2)];
    chart.nu0_c = chart.nu1_c;  // identical at the fold center by construction

    double frad = 0.0;
    for (size_t k = 0; k < fx_t.size(); ++k)
        frad = std::max(frad, std::abs(-fy_t[k] + chart.b));  // |x_n + b|
    chart.fit_radius = frad;

    chart.S = agmon_ray_quadrature(spec, x1);
    return chart;
}

LagrangianChart make_fold_chart(double C0, double xi_range, double S) {
    LagrangianChart chart;
    chart.frame.x1 = {0.0, 0.0};
    chart.frame.normal = {1.0, 0.0};
    chart.frame.C0 = C0;
    chart.frame.dim = 1;
    chart.S = S;
    chart.F.c = {0.0, 0.0, 1.0 / C0};
    chart.g = chart.F.antiderivative();
    chart.xi_c = 0.0;
    chart.b = 0.0;
    chart.a_val = 0.0;
    chart.nu1_c = 1.0 / C0;
    chart.nu0_c = 1.0 / C0;
    chart.nu1_taylor = Series(8);
    chart.nu1_taylor.a[0] = 1.0 / C0;
    chart.xi_data_max = xi_range;
    chart.fit_radius = xi_range * xi_range / C0;
    chart.extension_factor = 4.0;
    return chart;
}

// ---------------------------------------------------------------------------
// Critical points and the complex phase

CriticalPoints critical_points(const LagrangianChart& chart, double xn) {
    double u = xn + chart.b;
    if (!chart.in_chart(xn))
        throw Error(ErrorKind::OutsideChart, "x_n + b outside the chart trust region");
    CriticalPoints cp;
    cp.outside = u > 0.0;

    // Lagrange-inversion seed: xi = xi_c + Y(z), z^2 = -(x_n + b),
    // Y_k = [u^{k-1}] (nu1(u)^{-k/2}) / k.
    int K = std::min<int>(8, chart.nu1_taylor.terms());
    cplx z = cp.outside ? cplx(0.0, -std::sqrt(u)) : cplx(std::sqrt(-u), 0.0);
    auto Y = [&](cplx zz) {
        cplx acc = 0.0, zp = zz;
        for (int k = 1; k <= K; ++k) {
            Series pk = series_pow(chart.nu1_taylor, -0.5 * double(k));
            acc += pk.a[size_t(k - 1)] / double(k) * zp;
            zp *= zz;
        }
        return acc;
    };
    auto polish = [&](cplx xi) {
        Poly dF = chart.F.derivative();
        for (int it = 0; it < 40; ++it) {
            cplx f = xn + chart.F.eval(xi);
            cplx df = dF.eval(xi);
            if (std::abs(df) < 1e-14) break;
            cplx step = f / df;
            xi -= step;
            if (std::abs(step) < 1e-15) break;
        }
        return xi;
    };
    cp.minus = polish(chart.xi_c + Y(z));
    cp.plus = polish(chart.xi_c + Y(-z));
    if (cp.outside) {
        if (cp.minus.imag() > 0.0) std::swap(cp.plus, cp.minus);
    } else {
        if (cp.plus.real() < cp.minus.real()) std::swap(cp.plus, cp.minus);
    }
    return cp;
}

ComplexPhasePoint phase_phi_tilde(const LagrangianChart& chart, double xn) {
    CriticalPoints cp = critical_points(chart, xn);
    ComplexPhasePoint p;
    p.xn = xn;
    p.outside = cp.outside;
    p.xi_crit = cp.outside ? cp.minus : cp.plus;
    p.phi_tilde = xn * p.xi_crit + chart.g.eval(p.xi_crit);
    p.r_tilde = 0.5 * chart.F.derivative().eval(p.xi_crit);
    return p;
}

cplx nu_tilde_of(const LagrangianChart& chart, double xn) {
    double u = xn + chart.b;
    cplx z = u > 0.0 ? cplx(0.0, -std::sqrt(u)) : cplx(std::sqrt(-u), 0.0);
    if (std::abs(z) < 1e-12) {
        // Limit value (2/3) nu1(xi_c)^{-1/2}.
        return cplx(2.0 / (3.0 * std::sqrt(chart.nu1_c)), 0.0);
    }
    ComplexPhasePoint p = phase_phi_tilde(chart, xn);
    cplx num = chart.a_val - chart.b * chart.xi_c - chart.xi_c * z * z - p.phi_tilde;
    return num / (z * z * z);
}

cplx nu_tilde_zero(const LagrangianChart& chart) {
    // Critical value as a series in z: xi* = xi_c + Y(z) with the Lagrange
    // series, x_n = -z^2 - b, T(z) = x_n xi* + g(xi*); nu_tilde(0) = -[z^3] T.
    int K = std::min<int>(8, chart.nu1_taylor.terms());
    int terms = K + 2;
    Series Y(terms);
    for (int k = 1; k <= K; ++k) {
        Series pk = series_pow(chart.nu1_taylor, -0.5 * double(k));
        Y.a[size_t(k)] = pk.a[size_t(k - 1)] / double(k);
    }
    auto gtay = taylor_at(chart.g, cplx(chart.xi_c, 0.0), terms);
    Series gser(terms);
    for (int i = 0; i < terms && i < int(gtay.size()); ++i) gser.a[size_t(i)] = gtay[size_t(i)];
    Series g_of_Y = series_compose(gser, Y);
    Series xn(terms);
    xn.a[0] = -chart.b;
    if (terms > 2) xn.a[2] = -1.0;
    Series xi_star(terms);
    xi_star.a[0] = chart.xi_c;
    for (int i = 0; i < terms; ++i) xi_star.a[size_t(i)] += Y.a[size_t(i)];
    Series T = series_mul(xn, xi_star);
    for (int i = 0; i < terms; ++i) T.a[size_t(i)] += g_of_Y.a[size_t(i)];
    return -T.a[3];
}

// ---------------------------------------------------------------------------
// Symbol matching

void match_symbol_c(LagrangianChart& chart, const Wkb1D& wkb, const MatchControls& ctl) {
    std::vector<double> xi_nodes, c_vals;
    Poly dF = chart.F.derivative();
    for (int k = 0; k < ctl.n_nodes; ++k) {
        double frac = ctl.xi_lo_frac +
                      (ctl.xi_hi_frac - ctl.xi_lo_frac) * double(k) / double(ctl.n_nodes - 1);
        double xi = chart.xi_c + frac * chart.xi_data_max;
        double xnv = -chart.F.eval(xi);  // the x with xi^+(x) = xi
        double x_amb = chart.frame.x1.x + chart.frame.normal.x * xnv;
        double r = 0.5 * dF.eval(xi);
        if (!(r > 0.0)) continue;
        double a0;
        try {
            a0 = wkb.a0(x_amb);
        } catch (const Error&) {
            continue;
        }
        xi_nodes.push_back(xi);
        c_vals.push_back(std::sqrt(r / kPi) * a0);
    }
    if (xi_nodes.size() < size_t(ctl.degree + 3))
        throw Error(ErrorKind::InnerStripUnavailable,
                    "matching window left no usable interior nodes");
    chart.c0 = polyfit(xi_nodes, c_vals, ctl.degree);
    chart.has_c0 = true;
}

// ---------------------------------------------------------------------------
// Contour quadrature

namespace {

struct Contour {
    std::vector<cplx> vertices;  // polyline, traversed in order
};

Contour build_contour(const std::function<cplx(cplx)>& psi, const std::function<cplx(cplx)>& dpsi,
                      cplx xi_star, cplx psi2, double h, double gain_target, double cap_radius) {
    double alpha = -0.5 * std::arg(psi2);
    // Fold alpha into (-pi/2, pi/2] so the traversal runs left to right.
    if (alpha <= -0.5 * kPi) alpha += kPi;
    if (alpha > 0.5 * kPi) alpha -= kPi;
    cplx dir = std::exp(cplx(0.0, alpha));

    double core = 3.0 * std::sqrt(h / std::abs(psi2));
    core = std::min(core, 0.5 * cap_radius);
    cplx e_right = xi_star + core * dir;
    cplx e_left = xi_star - core * dir;

    double re0 = psi(xi_star).real();
    auto extend = [&](cplx from, cplx sense_hint) {
        // March along the locally recomputed ascent direction of Re psi until
        // the phase gain reaches the target, the gain stops growing, or the
        // trust radius is hit; the outer segment is the straight chord.
        cplx d0 = dpsi(from);
        cplx step_dir;
        if (std::abs(d0) > 1e-13) {
            step_dir = std::conj(d0) / std::abs(d0);
            if ((step_dir * std::conj(sense_hint)).real() < 0.0) {
                // keep the traversal sense
            }
        } else {
            step_dir = sense_hint;
        }
        double step = std::max(0.02 * cap_radius, 1e-4);
        cplx p = from;
        double best = psi(p).real();
        cplx best_p = p;
        for (int k = 0; k < 400; ++k) {
            cplx d = dpsi(p);
            cplx sd = std::abs(d) > 1e-13 ? std::conj(d) / std::abs(d) : step_dir;
            // Do not let the direction reverse through the saddle.
            if ((sd * std::conj(step_dir)).real() < 0.0) sd = step_dir;
            p += step * sd;
            if (std::abs(p - xi_star) > cap_radius) break;
            double re = psi(p).real();
            if (re > best) {
                best = re;
                best_p = p;
            } else {
                break;  // ridge reached (second saddle side)
            }
            if (best - re0 >= gain_target) break;
        }
        return best_p;
    };
    cplx end_right = extend(e_right, dir);
    cplx end_left = extend(e_left, -dir);

    Contour c;
    c.vertices = {end_left, e_left, e_right, end_right};
    return c;
}

cplx integrate_contour(const Contour& contour, const std::function<cplx(cplx)>& psi,
                       const std::function<cplx(cplx)>& cfun, double h, cplx psi_star,
                       int pts_per_seg) {
    const GaussRule& rule = gauss_legendre(pts_per_seg);
    cplx total = 0.0;
    for (size_t s = 0; s + 1 < contour.vertices.size(); ++s) {
        cplx A = contour.vertices[s], B = contour.vertices[s + 1];
        cplx span = B - A;
        if (std::abs(span) == 0.0) continue;
        cplx acc = 0.0;
        for (int q = 0; q < pts_per_seg; ++q) {
            cplx xi = A + (0.5 * (rule.nodes[size_t(q)] + 1.0)) * span;
            cplx arg = -(psi(xi) - psi_star) / h;
            acc += rule.weights[size_t(q)] * std::exp(arg) * cfun(xi);
        }
        total += 0.5 * span * acc;
    }
    return total;
}

}  // namespace

cplx airy_eval_custom(const LagrangianChart& chart, const std::function<cplx(cplx)>& g_tilde,
                      const std::function<cplx(cplx)>& c_tilde, double xn, double h,
                      const ContourControls& ctl) {
    CriticalPoints cp = critical_points(chart, xn);
    cplx xi_star = cp.outside ? cp.minus : cp.plus;

    auto psi = [&](cplx xi) { return xn * xi + g_tilde(xi); };
    // Second derivative by a small complex stencil on g_tilde (works for both
    // polynomial and mode-B callables).
    auto dpsi = [&](cplx xi) {
        double e = 1e-6;
        return cplx(xn, 0.0) + (g_tilde(xi + e) - g_tilde(xi - e)) / (2.0 * e);
    };
    double e = 1e-5;
    cplx psi2 = (g_tilde(xi_star + e) - 2.0 * g_tilde(xi_star) + g_tilde(xi_star - e)) / (e * e);
    if (std::abs(psi2) < 1e-12)
        throw Error(ErrorKind::ContourFailure, "phase second derivative below 1e-12");

    double gain = ctl.gain_factor * h * std::log(1.0 / h);
    double cap = chart.extension_factor * (chart.xi_data_max + std::abs(xi_star - chart.xi_c));
    Contour contour = build_contour(psi, dpsi, xi_star, psi2, h, gain, cap);
    cplx psi_star = psi(xi_star);
    cplx integral = integrate_contour(contour, psi, c_tilde, h, psi_star, ctl.points_per_segment);
    return std::pow(h, -0.5) * std::exp(-psi_star / h) * integral;
}

cplx airy_eval(const LagrangianChart& chart, const Poly& c0, double xn, double h,
               const ContourControls& ctl) {
    if (ctl.mode == HoloMode::ChebyshevA) {
        auto g_tilde = [&](cplx xi) { return chart.g.eval(xi); };
        auto c_tilde = [&](cplx xi) { return c0.eval(xi); };
        return airy_eval_custom(chart, g_tilde, c_tilde, xn, h, ctl);
    }
    // Mode B: truncated-Taylor almost-analytic extensions built from the real
    // restrictions of g and c0.
    double lo = chart.xi_c - chart.extension_factor * chart.xi_data_max;
    double hi = chart.xi_c + chart.extension_factor * chart.xi_data_max;
    HoloApprox gB = holomorphic_approx([&](double t) { return chart.g.eval(t); }, lo, hi, 0.1,
                                       HoloMode::TaylorB, 48, 12);
    HoloApprox cB = holomorphic_approx([&](double t) { return c0.eval(t); }, lo, hi, 0.1,
                                       HoloMode::TaylorB, 48, 12);
    auto g_tilde = [&](cplx xi) { return gB(xi); };
    auto c_tilde = [&](cplx xi) { return cB(xi); };
    return airy_eval_custom(chart, g_tilde, c_tilde, xn, h, ctl);
}

// ---------------------------------------------------------------------------
// Steepest-descent expansion

SteepestExpansion steepest_expand(const LagrangianChart& chart, const Poly& c0, double xn,
                                  double h, int L, const BandControls& band) {
    double u = xn + chart.b;
    double lo = band.band_lo * chart.fit_radius, hi = band.band_hi * chart.fit_radius;
    if (!(u >= lo && u <= hi))
        throw Error(ErrorKind::BandViolation, "x_n + b outside the evaluation band");
    double k = h * std::log(1.0 / h);
    if (band.band_lo * chart.fit_radius < band.strip_scale * std::pow(k, 2.0 / 3.0))
        throw Error(ErrorKind::BandViolation,
                    "band_lo * fit_radius below the strip-width floor for this h");

    SteepestExpansion ex;
    ex.at = phase_phi_tilde(chart, xn);
    cplx xi_star = ex.at.xi_crit;
    cplx r = ex.at.r_tilde;

    int terms = 2 * L + 6;
    auto gtay = taylor_at(chart.g, xi_star, terms + 1);
    auto ctay = taylor_at(c0, xi_star, terms);

    // s(eta) = eta sqrt(1 + sum_{k>=3} (g_k / r) eta^{k-2}), zeta = s(eta).
    Series inner(terms);
    inner.a[0] = 1.0;
    for (int kk = 3; kk <= terms && kk < int(gtay.size()); ++kk)
        inner.a[size_t(kk - 2)] = gtay[size_t(kk)] / r;
    Series root = series_pow(inner, 0.5);
    Series s(terms);
    for (int i = 0; i + 1 < terms; ++i) s.a[size_t(i + 1)] = root.a[size_t(i)];
    Series eta = series_invert(s);

    Series etap(terms);  // d eta / d zeta
    for (int i = 0; i + 1 < terms; ++i)
        etap.a[size_t(i)] = eta.a[size_t(i + 1)] * double(i + 1);

    Series cser(terms);
    for (int i = 0; i < terms && i < int(ctay.size()); ++i) cser.a[size_t(i)] = ctay[size_t(i)];
    Series phi_series = series_mul(series_compose(cser, eta), etap);

    // value = e^{-phi/h}/sqrt(r) sum_j Gamma(j+1/2) Phi_{2j} (h/r)^j.
    cplx sum = 0.0;
    double gam = std::sqrt(kPi);  // Gamma(1/2)
    cplx hr = h / r;
    cplx hrj = 1.0;
    ex.beta.clear();
    for (int j = 0; j <= L; ++j) {
        cplx phi2j = 2 * j < phi_series.terms() ? phi_series.a[size_t(2 * j)] : cplx(0.0);
        sum += gam * phi2j * hrj;
        ex.beta.push_back(gam * phi2j * std::pow(r, 2.0 * j));
        if (j == 1) ex.a1_tilde = gam * phi2j / (std::sqrt(r) * r);
        gam *= (double(j) + 0.5);  // Gamma(j+3/2) = (j+1/2) Gamma(j+1/2)
        hrj *= hr;
    }
    ex.value = std::exp(-ex.at.phi_tilde / h) / std::sqrt(r) * sum;
    ex.a0_tilde = std::sqrt(kPi / r) * c0.eval(xi_star);
    return ex;
}

std::vector<OutwardSample> outward_wkb(const LagrangianChart& chart, const Poly& c0,
                                       const std::vector<double>& xn_values, double h,
                                       const BandControls& band) {
    std::vector<OutwardSample> out;
    for (double xn : xn_values) {
        SteepestExpansion ex = steepest_expand(chart, c0, xn, h, 1, band);
        OutwardSample s;
        s.xn_plus_b = xn + chart.b;
        s.phi_tilde = ex.at.phi_tilde;
        s.a0_abs = std::abs(ex.a0_tilde);
        s.w = std::pow(h, -0.25) * std::exp(-(chart.S + ex.at.phi_tilde) / h) *
              (ex.a0_tilde + h * ex.a1_tilde);
        out.push_back(s);
    }
    return out;
}

}  // namespace resonia
