#pragma once

#include "resonia/core.hpp"

namespace resonia {

// Reference Airy function for complex argument, |arg z| < pi.
// Maclaurin series for moderate |z|, Poincare asymptotics beyond; entirely
// independent of the contour-quadrature code it serves as an oracle for.
cplx airy_ai(cplx z);

// Closed form of the fold-normal-form integral
//   I(x_n, h) = h^{-1/2} int_gamma e^{-(x_n xi + xi^3/(3 C0))/h} dxi
// over the outgoing steepest-descent contour:
//   I = -2 pi i e^{2 pi i/3} (C0 h)^{1/3} h^{-1/2} Ai(x_n C0^{1/3} h^{-2/3} e^{-i pi/3}).
cplx fold_airy_closed_form(double C0, double xn, double h);

}  // namespace resonia
