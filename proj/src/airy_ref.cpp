#include "resonia/airy_ref.hpp"

#include <cmath>

namespace resonia {

namespace {

// Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3).
constexpr double kAi0 = 0.35502805388781723926;
constexpr double kAip0 = -0.25881940379280679841;

cplx airy_series(cplx z) {
    cplx z3 = z * z * z;
    cplx f = 1.0, fterm = 1.0;
    cplx g = z, gterm = z;
    for (int k = 1; k < 120; ++k) {
        fterm *= z3 / double((3 * k) * (3 * k - 1));
        gterm *= z3 / double((3 * k + 1) * (3 * k));
        f += fterm;
        g += gterm;
        if (std::abs(fterm) + std::abs(gterm) < 1e-19 * (std::abs(f) + std::abs(g))) break;
    }
    return kAi0 * f + kAip0 * g;
}

cplx airy_asymptotic(cplx z) {
    cplx zeta = (2.0 / 3.0) * std::pow(z, 1.5);
    cplx pre = std::exp(-zeta) / (2.0 * std::sqrt(kPi) * std::pow(z, 0.25));
    cplx sum = 1.0, term = 1.0;
    double u = 1.0;
    double prev = 1e300;
    for (int k = 1; k <= 24; ++k) {
        u *= double(6 * k - 5) * double(6 * k - 1) / (72.0 * double(k));
        term = u / std::pow(-zeta, double(k));
        double mag = std::abs(term);
        if (mag > prev) break;  // past the least term
        sum += term;
        prev = mag;
    }
    return pre * sum;
}

}  // namespace

cplx airy_ai(cplx z) {
    if (std::abs(z) <= 6.0) return airy_series(z);
    return airy_asymptotic(z);
}

cplx fold_airy_closed_form(double C0, double xn, double h) {
    cplx arg = xn * std::cbrt(C0) * std::pow(h, -2.0 / 3.0) *
               std::exp(cplx(0.0, -kPi / 3.0));
    cplx pre = cplx(0.0, -2.0 * kPi) * std::exp(cplx(0.0, 2.0 * kPi / 3.0)) *
               std::cbrt(C0 * h) * std::pow(h, -0.5);
    return pre * airy_ai(arg);
}

}  // namespace resonia
