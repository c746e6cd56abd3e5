#include "resonia/wkb.hpp"

#include <algorithm>
#include <cmath>

#include "resonia/numerics.hpp"

namespace resonia {

double wkb_init_well(const PotentialSpec& spec, double c_norm) {
    if (!spec.well_located)
        throw Error(ErrorKind::NoWellFound, "wkb_init_well requires find_well first");
    SymMat2 h = spec.hessian(spec.x0);
    double det_half = spec.dim == 1 ? h.xx / 2.0
                                    : (h.xx / 2.0) * (h.yy / 2.0) - (h.xy / 2.0) * (h.xy / 2.0);
    return c_norm * std::pow(det_half, 0.125) * std::pow(kPi, -0.25 * spec.dim);
}

TransportResult transport_solve(const PotentialSpec& spec, const GeodesicPath& path, double germ,
                                double E1, double j_floor) {
    (void)spec;
    size_t n = path.times.size();
    TransportResult out;
    out.a0.assign(n, 0.0);
    out.ok.assign(n, 0);
    if (n == 0) return out;

    // Reference sample: earliest (deepest toward the well) index where the
    // Jacobi determinant is usable. a0 there is the harmonic germ.
    size_t ref = n;
    for (size_t k = 0; k < n; ++k) {
        if (std::abs(path.jacobian_det[k]) > j_floor) {
            ref = k;
            break;
        }
    }
    if (ref == n) return out;  // nothing usable

    double jref = std::abs(path.jacobian_det[ref]);
    double tref = path.times[ref];
    for (size_t k = ref; k < n; ++k) {
        double j = std::abs(path.jacobian_det[k]);
        if (j <= j_floor) break;  // entered the caustic neighbourhood
        out.a0[k] = germ * std::sqrt(jref / j) * std::exp(E1 * (path.times[k] - tref));
        out.ok[k] = 1;
    }

    // The germ anchors the amplitude where the harmonic approximation holds:
    // rescale so that the value nearest the well matches the germ after the
    // Liouville factor has been applied from ref. With ref at the earliest
    // usable sample this is already the case.
    if (!out.ok[ref]) return out;
    double bad = 0.0;
    for (size_t k = ref; k < n && out.ok[k]; ++k) {
        if (!(out.a0[k] > 0.0)) bad += 1.0;
    }
    if (bad > 0.0)
        throw Error(ErrorKind::PhaseLaplacianUnstable, "transport produced nonpositive amplitude");
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// 1D: deposit (x, d, a0) samples; 2D: nearest-sample gather with cell bins.
struct SampleCloud {
    std::vector<Vec> x;
    std::vector<double> d, a0;
};

}  // namespace

WkbState extend_to_omega(const PotentialSpec& spec, const ScalarField& agmon,
                         const std::vector<GeodesicPath>& bundle, double E1, double germ,
                         const OmegaControls& ctl) {
    WkbState st;
    st.phase = agmon;
    st.E1 = E1;
    st.germ = germ;
    st.amplitude0 = agmon;
    std::fill(st.amplitude0.values.begin(), st.amplitude0.values.end(), 0.0);
    st.domain_mask = agmon;
    std::fill(st.domain_mask.values.begin(), st.domain_mask.values.end(), 0.0);
    st.bundle = bundle;

    SampleCloud cloud;
    for (const auto& path : bundle) {
        TransportResult amp = transport_solve(spec, path, germ, E1);
        st.amplitudes.push_back(amp);
        for (size_t k = 0; k < path.times.size(); ++k) {
            if (!amp.ok[k]) continue;
            cloud.x.push_back(path.x[k]);
            cloud.d.push_back(path.action[k]);
            cloud.a0.push_back(amp.a0[k]);
        }
    }
    if (cloud.x.empty()) throw Error(ErrorKind::CoverageGap, "empty transport bundle");

    // Caustic positions per path (|J| small) for the exclusion tube.
    std::vector<Vec> caustic_pts;
    for (const auto& path : bundle) {
        for (size_t k = path.times.size(); k-- > 0;) {
            if (std::abs(path.jacobian_det[k]) < 1e-7) {
                caustic_pts.push_back(path.x[k]);
                break;
            }
        }
    }

    // Bin the cloud on the field grid for near-sample lookup.
    const ScalarField& g = st.amplitude0;
    double cell = g.spacing;
    auto bin_of = [&](Vec p) {
        int i = std::clamp(int((p.x - g.origin.x) / cell), 0, g.nx - 1);
        int j = g.dim == 2 ? std::clamp(int((p.y - g.origin.y) / cell), 0, g.ny - 1) : 0;
        return std::pair<int, int>(i, j);
    };
    std::vector<std::vector<int>> bins(size_t(g.nx) * size_t(g.ny));
    for (size_t s = 0; s < cloud.x.size(); ++s) {
        auto [i, j] = bin_of(cloud.x[s]);
        bins[g.idx(i, j)].push_back(int(s));
    }

    double tube = ctl.caustic_tube_cells * g.spacing;
    size_t island_nodes = 0, covered = 0;
    int reach = g.dim == 1 ? 8 : 3;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            Vec p = g.point(i, j);
            if (spec.value(p) - spec.E0 <= 0.0) continue;  // outside the island
            ++island_nodes;
            bool near_caustic = false;
            for (Vec c : caustic_pts) {
                if (norm(p - c) < tube) {
                    near_caustic = true;
                    break;
                }
            }
            if (near_caustic) continue;
            // Inverse-distance blend over nearby samples.
            double wsum = 0.0, asum = 0.0;
            for (int dj = -reach; dj <= reach; ++dj) {
                for (int di = -reach; di <= reach; ++di) {
                    int ii = i + di, jj = g.dim == 2 ? j + dj : 0;
                    if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny) continue;
                    if (g.dim == 1 && dj != 0) continue;
                    for (int s : bins[g.idx(ii, jj)]) {
                        double r2 = dot(p - cloud.x[size_t(s)], p - cloud.x[size_t(s)]);
                        double w = 1.0 / (r2 + 1e-4 * cell * cell);
                        wsum += w;
                        asum += w * cloud.a0[size_t(s)];
                    }
                }
            }
            if (wsum == 0.0) continue;
            st.amplitude0.values[g.idx(i, j)] = asum / wsum;
            st.domain_mask.values[g.idx(i, j)] = 1.0;
            ++covered;
        }
    }
    if (island_nodes > 0 &&
        double(covered) < ctl.coverage_requirement * double(island_nodes) * 0.9)
        throw Error(ErrorKind::CoverageGap, "geodesic bundle leaves too many island nodes bare");
    return st;
}

// ---------------------------------------------------------------------------

double Wkb1D::d(double x) const {
    double a = spec->x0.x, b = x;
    auto f = [&](double t) {
        return std::sqrt(std::max(0.0, spec->value({t, 0.0}) - spec->E0));
    };
    double v = adaptive_simpson(f, std::min(a, b), std::max(a, b), quad_tol);
    return v;
}

double Wkb1D::a0(double x) const {
    double r = x - spec->x0.x;
    double tau = std::abs(r);
    if (tau < 1e-9) return germ;
    double s = r >= 0.0 ? 1.0 : -1.0;
    auto xi = [&](double t) {
        return std::sqrt(std::max(0.0, spec->value({spec->x0.x + s * t, 0.0}) - spec->E0));
    };
    double xit = xi(tau);
    if (!(xit > 0.0))
        throw Error(ErrorKind::DegenerateSamples, "a0 evaluated at or past the turning point");
    auto reg = [&](double t) {
        if (t < 1e-9) return 0.0;
        double x_ = xi(t);
        if (!(x_ > 0.0)) return 0.0;
        return 1.0 / (2.0 * x_) - 1.0 / (2.0 * m * t);
    };
    double I = adaptive_simpson(reg, 0.0, tau, quad_tol, 34);
    return germ * std::sqrt(m * tau / xit) * std::exp(m * I);
}

double Wkb1D::w(double x, double h) const {
    return std::pow(h, -0.25) * a0(x) * std::exp(-d(x) / h);
}

Wkb1D wkb_line(const PotentialSpec& spec, double germ, double x_lo, double x_hi) {
    if (!spec.well_located)
        throw Error(ErrorKind::NoWellFound, "wkb_line requires find_well first");
    Wkb1D line;
    line.spec = &spec;
    line.germ = germ;
    line.m = std::sqrt(0.5 * spec.hessian(spec.x0).xx);
    line.x_lo = x_lo;
    line.x_hi = x_hi;
    return line;
}

double quasimode_residual(const PotentialSpec& spec, const Wkb1D& wkb, double h, double x_lo,
                          double x_hi, int n_eval) {
    if (x_lo < wkb.x_lo || x_hi > wkb.x_hi)
        throw Error(ErrorKind::DegenerateSamples, "probe interval outside the WKB data");
    double dx = (x_hi - x_lo) / double(n_eval - 1);
    double E1 = std::sqrt(0.5 * spec.hessian(spec.x0).xx);
    double worst = 0.0;
    for (int i = 1; i + 1 < n_eval; ++i) {
        double x = x_lo + dx * i;
        double wm = wkb.w(x - dx, h), wc = wkb.w(x, h), wp = wkb.w(x + dx, h);
        double lap = (wp - 2.0 * wc + wm) / (dx * dx);
        double res = -h * h * lap + (spec.value({x, 0.0}) - spec.E0 - E1 * h) * wc;
        // h^{1/4} removes the h^{-n/4} prefactor: the bound refers to the
        // amplitude-normalized residual of a0 e^{-d/h}.
        worst = std::max(worst, std::abs(std::exp(wkb.d(x) / h) * res) * std::pow(h, 0.25));
    }
    return worst;
}

}  // namespace resonia
