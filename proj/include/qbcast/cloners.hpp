#pragma once

#include "qbcast/channels.hpp"
#include "qbcast/densops.hpp"

namespace qbcast {

// The 1->2 symmetric cloner for inputs with a known phase omega: d = 4,
// pure |anc_0> ancilla, both clone marginals equal to the fixed pure state
// (e^{i(pi/2 - omega)}|0> + |1>)/sqrt(2) for every input sharing omega, so
// the clone fidelity is 1/2 there. The two defining columns are published
// with unit-modulus entries and enter here normalized by 1/2; the remaining
// columns are completed to a unitary (`completion_order` permutes the
// completion candidates; marginals do not depend on it).
BroadcastChannel omega_dqcm(double omega,
                            std::span<const std::size_t> completion_order = {});

// Bloch rescale map: keeps the (psi, psi_perp) eigenbasis and mixes the
// weights with z, i.e. the Bloch vector shrinks by (2z - 1).
DensityOperator scaling_channel_output(const QubitParams& p, double z);

// Fidelity of the rescale map against its input; depends on lambda and z
// only:
//   [sqrt((l(1-z) + (1-l)z)(1-l)) + sqrt((l z + (1-l)(1-z)) l)]^2
double fidelity_lambda_z(double lambda, double z);

// z = (2M+1)/(3M), the best rescale weight any 1->M machine can reach.
double optimal_scaling_weight(std::size_t M);

// fidelity_lambda_z at the optimal weight; the best clone fidelity for a
// 1->M machine whose figure of merit depends on lambda alone.
double optimal_mixed_fidelity(std::size_t M, double lambda);

// The 1->M symmetric universal cloner, realized as a unitary on the input
// qubit and a pure ancilla. Output registers: M clone qubits and an M-level
// machine system; each clone marginal is the rescale map at the optimal
// weight, for mixed inputs as well by linearity. Desk scale: 2 <= M <= 6.
BroadcastChannel gisin_massar_channel(std::size_t M);

// N->M scalar laws: z = (NM+M+N)/(M(N+2)) and f = (N/M)(M+2)/(N+2); the
// identity z = (1+f)/2 ties them together.
struct NMScalingParams {
    double z = 0.0;
    double f = 0.0;
};
NMScalingParams nm_scaling_params(std::size_t N, std::size_t M);

// Perfect broadcaster for the commuting family with fixed (theta, omega):
// maps |psi>|0...0> to |psi>^(x)M and |psi_perp>|0...0> to |psi_perp>^(x)M,
// so every clone marginal of rho_s(theta, omega, lambda) is rho_s exactly.
BroadcastChannel known_basis_broadcaster(double theta, double omega, std::size_t M);

bool commutes(const DensityOperator& r1, const DensityOperator& r2,
              double tol = 1e-10);

}  // namespace qbcast
