#include "resonia/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "resonia/numerics.hpp"

namespace resonia {

bool ScalarField::in_range(Vec p) const {
    double u = (p.x - origin.x) / spacing;
    if (u < 0.0 || u > nx - 1) return false;
    if (dim == 2) {
        double v = (p.y - origin.y) / spacing;
        if (v < 0.0 || v > ny - 1) return false;
    }
    return true;
}

double ScalarField::interp(Vec p) const {
    double u = (p.x - origin.x) / spacing;
    int i = std::clamp(int(u), 0, nx - 2);
    double fu = u - i;
    if (dim == 1) return values[idx(i)] * (1.0 - fu) + values[idx(i + 1)] * fu;
    double v = (p.y - origin.y) / spacing;
    int j = std::clamp(int(v), 0, ny - 2);
    double fv = v - j;
    double a = values[idx(i, j)] * (1.0 - fu) + values[idx(i + 1, j)] * fu;
    double b = values[idx(i, j + 1)] * (1.0 - fu) + values[idx(i + 1, j + 1)] * fu;
    return a * (1.0 - fv) + b * fv;
}

// ---------------------------------------------------------------------------

namespace {

// SPD square root of Hess V(x0) / 2; the local Agmon phase is x^T M x / 2.
SymMat2 sqrt_half_hess(const PotentialSpec& spec) {
    SymMat2 hess = spec.hessian(spec.x0);
    SymMat2 m;
    if (spec.dim == 1) {
        m.xx = std::sqrt(hess.xx / 2.0);
        return m;
    }
    auto ev = hess.eigenvalues();
    double l1 = ev[0] / 2.0, l2 = ev[1] / 2.0;
    if (l1 <= 0.0) throw Error(ErrorKind::NoWellFound, "Hessian not SPD at the well");
    double a = hess.xx / 2.0 - l1, b = hess.xy / 2.0;
    Vec v1 = std::abs(b) > 1e-14 ? Vec{b, -a} : Vec{1.0, 0.0};
    if (std::abs(b) <= 1e-14 && std::abs(a) > 1e-14) v1 = {0.0, 1.0};
    v1 = (1.0 / norm(v1)) * v1;
    Vec v2{-v1.y, v1.x};
    double s1 = std::sqrt(l1), s2 = std::sqrt(l2);
    m.xx = s1 * v1.x * v1.x + s2 * v2.x * v2.x;
    m.xy = s1 * v1.x * v1.y + s2 * v2.x * v2.y;
    m.yy = s1 * v1.y * v1.y + s2 * v2.y * v2.y;
    return m;
}

}  // namespace

ScalarField agmon_fast_march(const PotentialSpec& spec, const GridControls& grid) {
    if (!spec.well_located)
        throw Error(ErrorKind::NoWellFound, "agmon_fast_march requires find_well first");
    if (grid.seed_cells < 3)
        throw Error(ErrorKind::GridTooCoarse, "harmonic seed ball under 3 cells");

    ScalarField d;
    d.dim = spec.dim;
    d.nx = grid.resolution;
    d.ny = spec.dim == 2 ? grid.resolution : 1;
    d.spacing = 2.0 * grid.box / double(grid.resolution - 1);
    d.origin = {spec.x0.x - grid.box, spec.dim == 2 ? spec.x0.y - grid.box : 0.0};
    size_t total = size_t(d.nx) * size_t(d.ny);
    d.values.assign(total, std::numeric_limits<double>::infinity());
    d.mask.assign(total, 0);

    auto speed = [&](int i, int j) {
        double s = std::sqrt(std::max(0.0, spec.value(d.point(i, j)) - spec.E0));
        return std::max(s, grid.speed_floor);
    };

    SymMat2 m = sqrt_half_hess(spec);
    auto seed_value = [&](Vec p) {
        Vec r = p - spec.x0;
        return 0.5 * dot(r, m.apply(r));
    };

    enum : unsigned char { kFar = 0, kNarrow = 1, kKnown = 2 };
    std::vector<unsigned char> state(total, kFar);
    using QE = std::pair<double, size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> heap;

    int ic = int(std::round((spec.x0.x - d.origin.x) / d.spacing));
    int jc = spec.dim == 2 ? int(std::round((spec.x0.y - d.origin.y) / d.spacing)) : 0;
    double seed_r = grid.seed_cells * d.spacing;
    for (int j = std::max(0, jc - grid.seed_cells - 1);
         j <= std::min(d.ny - 1, jc + grid.seed_cells + 1); ++j) {
        for (int i = std::max(0, ic - grid.seed_cells - 1);
             i <= std::min(d.nx - 1, ic + grid.seed_cells + 1); ++i) {
            if (spec.dim == 1 && j != 0) continue;
            Vec p = d.point(i, j);
            if (norm(p - spec.x0) <= seed_r) {
                size_t id = d.idx(i, j);
                d.values[id] = seed_value(p);
                state[id] = kKnown;
                d.mask[id] = 1;
                heap.push({d.values[id], id});
            }
        }
    }
    if (heap.empty()) throw Error(ErrorKind::GridTooCoarse, "seed ball missed the grid");

    auto update = [&](int i, int j) {
        size_t id = d.idx(i, j);
        if (state[id] == kKnown) return;
        double f = speed(i, j);
        double dmx = std::numeric_limits<double>::infinity();
        if (i > 0 && state[d.idx(i - 1, j)] == kKnown) dmx = d.values[d.idx(i - 1, j)];
        if (i + 1 < d.nx && state[d.idx(i + 1, j)] == kKnown)
            dmx = std::min(dmx, d.values[d.idx(i + 1, j)]);
        double dmy = std::numeric_limits<double>::infinity();
        if (spec.dim == 2) {
            if (j > 0 && state[d.idx(i, j - 1)] == kKnown) dmy = d.values[d.idx(i, j - 1)];
            if (j + 1 < d.ny && state[d.idx(i, j + 1)] == kKnown)
                dmy = std::min(dmy, d.values[d.idx(i, j + 1)]);
        }
        double h = d.spacing;
        double cand;
        if (dmx > dmy) std::swap(dmx, dmy);
        // dmx <= dmy. One-sided update first, two-sided if consistent.
        cand = dmx + f * h;
        if (std::isfinite(dmy) && cand > dmy) {
            double sum = dmx + dmy, diff = dmx - dmy;
            double disc = 2.0 * f * f * h * h - diff * diff;
            if (disc > 0.0) cand = 0.5 * (sum + std::sqrt(disc));
        }
        if (cand < d.values[id]) {
            d.values[id] = cand;
            state[id] = kNarrow;
            heap.push({cand, id});
        }
    };

    while (!heap.empty()) {
        auto [val, id] = heap.top();
        heap.pop();
        if (state[id] == kKnown && val > d.values[id]) continue;
        state[id] = kKnown;
        d.mask[id] = 1;
        int i = int(id % size_t(d.nx));
        int j = int(id / size_t(d.nx));
        if (i > 0) update(i - 1, j);
        if (i + 1 < d.nx) update(i + 1, j);
        if (spec.dim == 2) {
            if (j > 0) update(i, j - 1);
            if (j + 1 < d.ny) update(i, j + 1);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------

namespace {

// State layout for the Hamilton flow with Jacobi field:
// y = (x, xi, action, dx, dxi) — dx/dxi is the variational pair.
struct FlowState {
    Vec x, xi, dx, dxi;
    double act = 0.0;
};

FlowState rhs(const PotentialSpec& spec, const FlowState& s, double dir) {
    FlowState d;
    d.x = (2.0 * dir) * s.xi;
    d.xi = dir * spec.gradient(s.x);
    d.act = dir * 2.0 * dot(s.xi, s.xi);  // |xi| |xdot| with xdot = 2 xi on the shell
    SymMat2 h = spec.hessian(s.x);
    d.dx = (2.0 * dir) * s.dxi;
    d.dxi = dir * h.apply(s.dx);
    return d;
}

FlowState axpy(const FlowState& a, double c, const FlowState& b) {
    FlowState r = a;
    r.x = r.x + c * b.x;
    r.xi = r.xi + c * b.xi;
    r.dx = r.dx + c * b.dx;
    r.dxi = r.dxi + c * b.dxi;
    r.act += c * b.act;
    return r;
}

double err_norm(const FlowState& a, const FlowState& b, double atol, double rtol) {
    double e = 0.0;
    auto acc = [&](double u, double v) {
        double sc = atol + rtol * std::max(std::abs(u), std::abs(v));
        e = std::max(e, std::abs(u - v) / sc);
    };
    acc(a.x.x, b.x.x);
    acc(a.x.y, b.x.y);
    acc(a.xi.x, b.xi.x);
    acc(a.xi.y, b.xi.y);
    acc(a.act, b.act);
    return e;
}

}  // namespace

GeodesicPath geodesic_shoot(const PotentialSpec& spec, Vec x1, const ShootControls& ctl) {
    if (!spec.well_located)
        throw Error(ErrorKind::NoWellFound, "geodesic_shoot requires find_well first");

    // Integrate in s = -t (forward in s walks from the boundary to the well).
    FlowState y;
    y.x = x1;
    y.xi = {};
    y.act = 0.0;
    if (spec.dim == 2 && (ctl.jacobi_seed.x != 0.0 || ctl.jacobi_seed.y != 0.0)) {
        y.dx = (1.0 / norm(ctl.jacobi_seed)) * ctl.jacobi_seed;
        y.dxi = {};
    } else {
        y.dx = {};
        y.dxi = {};
    }

    // Records in s-order (boundary first), flipped into t-order at the end.
    std::vector<double> ss{0.0};
    std::vector<FlowState> states{y};

    // Cash-Karp 4(5) embedded pair.
    static const double b21 = 1.0 / 5.0;
    static const double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static const double b41 = 3.0 / 10.0, b42 = -9.0 / 10.0, b43 = 6.0 / 5.0;
    static const double b51 = -11.0 / 54.0, b52 = 5.0 / 2.0, b53 = -70.0 / 27.0,
                        b54 = 35.0 / 27.0;
    static const double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                        b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
    static const double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                        c6 = 512.0 / 1771.0;
    static const double d1 = 2825.0 / 27648.0, d3 = 18575.0 / 48384.0, d4 = 13525.0 / 55296.0,
                        d5 = 277.0 / 14336.0, d6 = 1.0 / 4.0;

    double s = 0.0, ds = ctl.dt_init;
    double dir = -1.0;  // backward in t
    bool reached = false;
    double max_defect = 0.0;
    double r_leave = 4.0 * std::max(norm(x1 - spec.x0), 1.0);
    int guard = 2000000;
    while (s < ctl.t_span && guard-- > 0) {
        FlowState k1 = rhs(spec, y, dir);
        FlowState k2 = rhs(spec, axpy(y, ds * b21, k1), dir);
        FlowState t3 = axpy(axpy(y, ds * b31, k1), ds * b32, k2);
        FlowState k3 = rhs(spec, t3, dir);
        FlowState t4 = axpy(axpy(axpy(y, ds * b41, k1), ds * b42, k2), ds * b43, k3);
        FlowState k4 = rhs(spec, t4, dir);
        FlowState t5 =
            axpy(axpy(axpy(axpy(y, ds * b51, k1), ds * b52, k2), ds * b53, k3), ds * b54, k4);
        FlowState k5 = rhs(spec, t5, dir);
        FlowState t6 = axpy(
            axpy(axpy(axpy(axpy(y, ds * b61, k1), ds * b62, k2), ds * b63, k3), ds * b64, k4),
            ds * b65, k5);
        FlowState k6 = rhs(spec, t6, dir);

        FlowState y5 = axpy(axpy(axpy(axpy(y, ds * c1, k1), ds * c3, k3), ds * c4, k4), ds * c6, k6);
        FlowState y4 = axpy(
            axpy(axpy(axpy(axpy(y, ds * d1, k1), ds * d3, k3), ds * d4, k4), ds * d5, k5),
            ds * d6, k6);

        double err = err_norm(y5, y4, ctl.abs_tol, ctl.rel_tol);
        if (err > 1.0) {
            ds = std::max(1e-12, 0.9 * ds * std::pow(err, -0.25));
            continue;
        }
        y = y5;
        s += ds;
        ss.push_back(s);
        states.push_back(y);
        double defect = std::abs(dot(y.xi, y.xi) - spec.value(y.x) + spec.E0);
        max_defect = std::max(max_defect, defect);
        if (norm(y.x - spec.x0) < ctl.r_stop) {
            reached = true;
            break;
        }
        if (norm(y.x - spec.x0) > r_leave)
            throw Error(ErrorKind::DidNotConverge, "geodesic left the island region");
        ds = std::min(ctl.t_span - s + 1e-15,
                      std::max(1e-12, 0.9 * ds * std::pow(std::max(err, 1e-10), -0.2)));
        if (ds <= 0.0) break;
    }
    if (!reached)
        throw Error(ErrorKind::DidNotConverge, "geodesic stalled before reaching the well");

    GeodesicPath path;
    size_t n = states.size();
    path.times.resize(n);
    path.x.resize(n);
    path.xi.resize(n);
    path.action.resize(n);
    path.jacobian_det.resize(n);
    // Close the tiny gap between the stopping point and x0 with the harmonic
    // quadratic, so action is measured from the well itself.
    SymMat2 m = sqrt_half_hess(spec);
    Vec gap = states.back().x - spec.x0;
    double total = states.back().act + 0.5 * dot(gap, m.apply(gap));
    for (size_t k = 0; k < n; ++k) {
        size_t rk = n - 1 - k;  // reverse to t-order (well first, boundary last)
        path.times[k] = -ss[rk];
        path.x[k] = states[rk].x;
        path.xi[k] = states[rk].xi;
        path.action[k] = total - states[rk].act;
        if (spec.dim == 1) {
            path.jacobian_det[k] = 2.0 * states[rk].xi.x;
        } else {
            // det[ xdot | dx ] with xdot = 2 xi.
            Vec v = 2.0 * states[rk].xi;
            path.jacobian_det[k] = v.x * states[rk].dx.y - v.y * states[rk].dx.x;
        }
    }
    path.energy_defect = max_defect;
    path.reached_well = reached;
    return path;
}

// ---------------------------------------------------------------------------

InteractionSet interaction_set(const ScalarField& d, const PotentialSpec& spec,
                               const IslandBoundary& boundary, const ClusterControls& ctl) {
    InteractionSet gs;
    size_t nb = boundary.points.size();
    if (nb == 0) throw Error(ErrorKind::NoBoundary, "empty boundary");
    std::vector<double> db(nb);
    for (size_t k = 0; k < nb; ++k) {
        Vec p = boundary.points[k];
        if (!d.in_range(p))
            throw Error(ErrorKind::GridTooCoarse, "boundary point outside the Agmon grid");
        db[k] = d.interp(p);
    }
    double S = *std::min_element(db.begin(), db.end());
    gs.S = S;

    // Typical speed scale near the boundary for the absolute tolerance floor.
    double speed_scale = 0.0;
    for (size_t k = 0; k < nb; ++k) {
        Vec inwards = boundary.points[k] - 0.05 * boundary.radius_estimate *
                          boundary.outward_normals[k];
        speed_scale = std::max(speed_scale,
                               std::sqrt(std::max(0.0, spec.value(inwards) - spec.E0)));
    }
    double tol = std::max(ctl.cluster_tol * S, ctl.grid_error_scale * d.spacing * speed_scale);

    std::vector<char> in(nb, 0);
    for (size_t k = 0; k < nb; ++k) in[k] = db[k] <= S + tol ? 1 : 0;

    if (spec.dim == 1) {
        for (size_t k = 0; k < nb; ++k) {
            if (in[k]) {
                gs.gamma_points.push_back(boundary.points[k]);
                gs.gamma_boundary_index.push_back(int(k));
                gs.transverse_hessian.push_back(0.0);
            }
        }
        gs.n_gamma = 0;
        return gs;
    }

    // 2D: cluster by adjacency along the closed polyline.
    size_t all = 0;
    for (auto c : in) all += size_t(c);
    if (all == nb) {
        // Whole boundary at distance S: Gamma is the full curve.
        gs.gamma_points = boundary.points;
        gs.gamma_boundary_index.resize(nb);
        for (size_t k = 0; k < nb; ++k) gs.gamma_boundary_index[k] = int(k);
        gs.n_gamma = 1;
        gs.transverse_hessian.assign(1, 0.0);
        return gs;
    }

    // Find contiguous runs (cyclic).
    std::vector<std::pair<size_t, size_t>> runs;  // [start, length]
    size_t k0 = 0;
    while (k0 < nb && in[k0]) ++k0;  // start outside a run
    if (k0 == nb) throw Error(ErrorKind::AmbiguousGamma, "inconsistent cluster flags");
    for (size_t off = 0; off < nb;) {
        size_t k = (k0 + off) % nb;
        if (!in[k]) {
            ++off;
            continue;
        }
        size_t len = 0;
        while (len < nb && in[(k + len) % nb]) ++len;
        runs.push_back({k, len});
        off += len;
    }

    // Arc length per vertex (polyline step).
    auto arc_step = [&](size_t k) {
        return norm(boundary.points[(k + 1) % nb] - boundary.points[k]);
    };
    double mean_step = 0.0;
    for (size_t k = 0; k < nb; ++k) mean_step += arc_step(k);
    mean_step /= double(nb);

    for (auto [start, len] : runs) {
        // Representative: the run's minimum of d.
        size_t best = start;
        for (size_t off = 0; off < len; ++off) {
            size_t k = (start + off) % nb;
            if (db[k] < db[best]) best = k;
        }
        gs.gamma_points.push_back(boundary.points[best]);
        gs.gamma_boundary_index.push_back(int(best));

        // Quadratic fit of d along arclength around the representative,
        // walking outward both ways from the run minimum.
        std::vector<double> ts, ys;
        int w = std::min<int>(std::max<int>(4, int(len)), int(nb) / 4);
        ts.push_back(0.0);
        ys.push_back(db[best]);
        double acc = 0.0;
        for (int off = 1; off <= w; ++off) {
            size_t k = (best + size_t(off)) % nb;
            acc += arc_step((best + size_t(off) - 1) % nb);
            ts.push_back(acc);
            ys.push_back(db[k]);
        }
        acc = 0.0;
        for (int off = 1; off <= w; ++off) {
            size_t k = (best + nb - size_t(off)) % nb;
            acc += arc_step(k);
            ts.push_back(-acc);
            ys.push_back(db[k]);
        }
        Poly q = polyfit(ts, ys, 2);
        gs.transverse_hessian.push_back(2.0 * q.c[2]);

        double extent = double(len) * mean_step;
        if (extent > 0.25 * double(nb) * mean_step)
            throw Error(ErrorKind::AmbiguousGamma,
                        "cluster neither point-like nor the full boundary");
    }
    gs.n_gamma = 0;
    return gs;
}

// ---------------------------------------------------------------------------

CausticInfo caustic_detect(const std::vector<GeodesicPath>& bundle, const PotentialSpec& spec,
                           const ScalarField* d_field, double S, double j_tol) {
    CausticInfo info;
    for (const auto& path : bundle) {
        size_t n = path.times.size();
        if (n < 2) continue;
        // First sign change or near-zero of the Jacobi determinant scanning
        // backward from the well end (skip the immediate neighbourhood of x0
        // where the 2D determinant legitimately starts near zero).
        size_t start = n / 8 + 1;
        for (size_t k = std::max<size_t>(start, 1); k < n; ++k) {
            double a = path.jacobian_det[k - 1], b = path.jacobian_det[k];
            bool flip = (a > j_tol && b < -j_tol) || (a < -j_tol && b > j_tol);
            bool dead = std::abs(b) < j_tol && std::abs(a) >= j_tol;
            if (flip || dead || (k == n - 1 && std::abs(b) < j_tol)) {
                Vec p = path.x[k];
                info.points.push_back(p);
                if (spec.dim == 2) {
                    Vec tangent = k > 0 ? path.x[k] - path.x[k - 1] : Vec{};
                    double tn = norm(tangent);
                    info.tangents.push_back(tn > 0 ? (1.0 / tn) * tangent : Vec{});
                } else {
                    info.tangents.push_back({});
                }
                // Interior if strictly inside the island (V > E0 there and
                // away from the boundary level set).
                if (spec.value(p) - spec.E0 > 1e-6) info.interior_empty = false;
                break;
            }
        }
    }
    // Fitted constant for phi|_C >= C (V - E0): smallest ratio over detected
    // caustic points with V - E0 bounded away from zero.
    if (d_field) {
        double cmin = std::numeric_limits<double>::infinity();
        bool any = false;
        for (Vec p : info.points) {
            double vexc = spec.value(p) - spec.E0;
            if (vexc < 1e-8 || !d_field->in_range(p)) continue;
            double phi = d_field->interp(p) - S;
            any = true;
            cmin = std::min(cmin, phi / vexc);
        }
        info.lemma_constant = any ? cmin : 0.0;
    }
    return info;
}

// ---------------------------------------------------------------------------

double agmon_ray_quadrature(const PotentialSpec& spec, Vec target, double tol) {
    Vec dirv = target - spec.x0;
    double len = norm(dirv);
    if (len == 0.0) return 0.0;
    Vec u = (1.0 / len) * dirv;
    auto f = [&](double t) {
        return std::sqrt(std::max(0.0, spec.value(spec.x0 + t * u) - spec.E0));
    };
    return adaptive_simpson(f, 0.0, len, tol);
}

}  // namespace resonia
