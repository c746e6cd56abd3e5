#include "resonia/width.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "resonia/numerics.hpp"
#include "resonia/wkb.hpp"

namespace resonia {

namespace {

// One-sided 4th-order derivative using five nodes stepping away from the
// surface into the interior; `inward` = +1 when interior nodes have larger
// index, -1 otherwise. Returns du/dx.
cplx one_sided_derivative(const std::vector<cplx>& u, size_t i0, double dx, int inward) {
    auto at = [&](int k) { return u[size_t(long(i0) + long(inward) * k)]; };
    // f'(x0) with nodes x0, x0 + s, ..., x0 + 4s, s = inward * dx:
    cplx d = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) /
             (12.0 * dx * double(inward));
    return d;
}

}  // namespace

double green_width(const std::vector<double>& x, const std::vector<cplx>& u, double h,
                   double surface_left, double surface_right, double island_radius) {
    if (x.size() != u.size() || x.size() < 16)
        throw Error(ErrorKind::NumericalFailure, "bad state arrays");
    double dx = x[1] - x[0];
    if (std::abs(surface_right - island_radius) < 3.0 * dx ||
        std::abs(surface_left + island_radius) < 3.0 * dx)
        throw Error(ErrorKind::SurfaceTooClose, "surface within 3 cells of the island boundary");

    auto index_of = [&](double xs) {
        double t = (xs - x[0]) / dx;
        long i = std::lround(t);
        if (i < 4 || i + 4 >= long(x.size()))
            throw Error(ErrorKind::SurfaceTooClose, "surface too close to the grid edge");
        return size_t(i);
    };
    size_t ir = index_of(surface_right);
    size_t il = index_of(surface_left);
    if (il + 8 >= ir) throw Error(ErrorKind::SurfaceTooClose, "degenerate surface pair");

    // Norm over W = [surface_left, surface_right], trapezoid.
    double norm2 = 0.0;
    for (size_t i = il; i <= ir; ++i) {
        double wgt = (i == il || i == ir) ? 0.5 : 1.0;
        norm2 += wgt * std::norm(u[i]) * dx;
    }

    // du/dn at the right surface: n = +x, interior is decreasing index.
    cplx dr = one_sided_derivative(u, ir, dx, -1);
    // du/dn at the left surface: n = -x, interior is increasing index.
    cplx dl = -one_sided_derivative(u, il, dx, +1);

    double flux = (dr * std::conj(u[ir])).imag() + (dl * std::conj(u[il])).imag();
    return -(h * h / norm2) * flux;
}

// ---------------------------------------------------------------------------

Beta0Density beta0_density(const LagrangianChart& chart, double xn_plus_b_probe, double h) {
    if (!chart.has_c0)
        throw Error(ErrorKind::InnerStripUnavailable, "chart has no matched symbol");
    Beta0Density out;
    out.probe_xn_plus_b = xn_plus_b_probe;
    double xn = xn_plus_b_probe - chart.b;
    ComplexPhasePoint p = phase_phi_tilde(chart, xn);
    // d phi~/d x_n = xi* at the critical point.
    cplx a0t = std::sqrt(kPi / p.r_tilde) * chart.c0.eval(p.xi_crit);
    out.direct = -p.xi_crit.imag() * std::norm(a0t);
    double c0c = chart.c0.eval(chart.xi_c);
    out.limit = kPi * c0c * c0c / chart.nu1_c;
    (void)h;
    if (!(out.limit > 0.0))
        throw Error(ErrorKind::NumericalFailure, "nonpositive boundary density");
    return out;
}

double stationary_phase_f0(const std::vector<Beta0Density>& exits, double calibration) {
    double f0 = 0.0;
    for (const auto& e : exits) f0 += e.limit;
    return calibration * f0;
}

// ---------------------------------------------------------------------------

AsymptoticFit asymptotic_fit(const std::vector<double>& hs, const std::vector<double>& im_rho) {
    size_t n = hs.size();
    if (n < 4) throw Error(ErrorKind::BadLadder, "need at least 4 ladder points");
    for (double v : im_rho)
        if (!(v < 0.0)) throw Error(ErrorKind::BadLadder, "Im rho must be negative");

    auto fit3 = [&](const std::vector<size_t>& use) {
        std::vector<double> A(use.size() * 3), bb(use.size());
        for (size_t r = 0; r < use.size(); ++r) {
            size_t i = use[r];
            A[r * 3 + 0] = 1.0 / hs[i];
            A[r * 3 + 1] = std::log(hs[i]);
            A[r * 3 + 2] = 1.0;
            bb[r] = std::log(-im_rho[i]);
        }
        return least_squares(A, bb, int(use.size()), 3);
    };
    std::vector<size_t> all(n);
    for (size_t i = 0; i < n; ++i) all[i] = i;
    auto c = fit3(all);
    AsymptoticFit out;
    out.S_fit = -c[0] / 2.0;
    out.p_fit = c[1];
    out.f0_fit = std::exp(c[2]);

    double rss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double pred = c[0] / hs[i] + c[1] * std::log(hs[i]) + c[2];
        rss += sq(pred - std::log(-im_rho[i]));
    }
    out.rms_residual = std::sqrt(rss / double(n));

    double smin = out.S_fit, smax = out.S_fit;
    if (n >= 5) {
        for (size_t skip = 0; skip < n; ++skip) {
            std::vector<size_t> use;
            for (size_t i = 0; i < n; ++i)
                if (i != skip) use.push_back(i);
            auto cs = fit3(use);
            smin = std::min(smin, -cs[0] / 2.0);
            smax = std::max(smax, -cs[0] / 2.0);
        }
    }
    out.loo_S_spread = smax - smin;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

int thread_budget(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RESONIA_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

}  // namespace

WidthReport run_width_ladder(const PotentialSpec& spec, const WidthOptions& opt) {
    if (!spec.well_located)
        throw Error(ErrorKind::NoWellFound, "run_width_ladder requires find_well");
    WidthReport rep;

    // Geometry shared across the ladder.
    IslandBoundary bdy = island_boundary(spec);
    double r_b = bdy.radius_estimate;
    GridControls gc;
    gc.box = std::max(2.0, 1.8 * r_b);
    gc.resolution = 4096;
    ScalarField agmon = agmon_fast_march(spec, gc);
    InteractionSet gamma = interaction_set(agmon, spec, bdy);
    // Path-accurate S for seeding and the report.
    double S_path = agmon_ray_quadrature(spec, bdy.points.back());
    rep.S_used = gamma.S;
    rep.n_gamma = gamma.n_gamma;

    // f0 prediction from the caustic charts at each exit.
    double germ = wkb_init_well(spec);
    Wkb1D wline = wkb_line(spec, germ, bdy.points.front().x, bdy.points.back().x);
    std::vector<Beta0Density> exits;
    for (const Vec& x1 : bdy.points) {
        LagrangianChart chart = fit_chart(spec, x1);
        match_symbol_c(chart, wline);
        exits.push_back(beta0_density(chart, 1e-3, opt.ladder.front()));
    }
    rep.f0_pred = stationary_phase_f0(exits);

    rep.points.resize(opt.ladder.size());
    std::vector<std::exception_ptr> errs(opt.ladder.size());
    auto run_point = [&](size_t i) {
        try {
            double h = opt.ladder[i];
            LadderPoint pt;
            pt.h = h;
            DirichletResult dir =
                dirichlet_ground_ball(spec, h, agmon, S_path, opt.eta_fraction * S_path);
            pt.lambda_D = dir.lambda;
            DiscretizedOperator op =
                complex_scaled_operator(spec, h, opt.theta, opt.R0, opt.box, opt.nodes);
            ResonanceResult rr = resonance_near(op, dir.lambda, S_path);
            pt.im_rho_eig = rr.rho.imag();
            pt.re_rho = rr.rho.real();
            pt.eig_residual = rr.residual;
            for (double off : opt.surface_offsets) {
                double xs = off * r_b;
                pt.green_by_offset.push_back(
                    green_width(rr.x, rr.u, h, -xs, xs, r_b));
            }
            // green_width returns Im rho directly (negative).
            pt.im_rho_green = pt.green_by_offset[pt.green_by_offset.size() / 2];
            rep.points[i] = pt;
        } catch (...) {
            errs[i] = std::current_exception();
        }
    };

    int budget = thread_budget(opt.threads);
    if (budget <= 1 || opt.ladder.size() <= 1) {
        for (size_t i = 0; i < opt.ladder.size(); ++i) run_point(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        int nthreads = std::min<int>(budget, int(opt.ladder.size()));
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < opt.ladder.size();
                     i = next.fetch_add(1))
                    run_point(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);

    if (opt.ladder.size() >= 4) {
        std::vector<double> hs, ims;
        for (const auto& p : rep.points) {
            hs.push_back(p.h);
            ims.push_back(p.im_rho_eig);
        }
        rep.fit = asymptotic_fit(hs, ims);
    } else {
        rep.skip_reason = "insufficient ladder";
    }
    return rep;
}

}  // namespace resonia
