#pragma once

#include "qbcast/densops.hpp"

#include <optional>

namespace qbcast {

// Uhlmann fidelity F(r1, r2) = [tr sqrt(sqrt(r1) r2 sqrt(r1))]^2, computed
// through the Hermitian eigendecomposition with eigenvalue clamping at
// -1e-10. Symmetric in its arguments; in [0, 1].
double uhlmann_fidelity(const DensityOperator& r1, const DensityOperator& r2);

// Closed-form fidelity between the output rho_A = [[x, y], [y*, 1-x]] and
// the input qubit identified by p:
//   F = 1/2 + (1/2)(2l-1)(2x-1)cos(2t)
//       + (1/2)(2l-1) 2 Re(e^{i w} y) sin(2t)
//       + 2 sqrt((l - l^2)(x - x^2 - |y|^2)).
// A radicand below -1e-10 is a hard error; within tolerance it clamps to 0.
double qubit_fidelity_closed_form(double x, cplx y, const QubitParams& p);

// Algebraic qubit shortcut F = tr(r1 r2) + 2 sqrt(det r1 det r2); identical
// to uhlmann_fidelity for 2x2 states but eigendecomposition-free. Used in
// hot loops; cross-checked against the general route in tests.
double qubit_fidelity_direct(const DensityOperator& r1, const DensityOperator& r2);

// Shrinking factor f with rho_out = ((1-f)/2) I + f rho_in, when a single f
// reproduces rho_out within residual 1e-9; nullopt when the pair is not a
// scaling (including rho_in = I/2, where f is not identifiable).
std::optional<double> shrinking_factor(const DensityOperator& rho_in,
                                       const DensityOperator& rho_out);

}  // namespace qbcast
