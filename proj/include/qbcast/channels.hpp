#pragma once

#include "qbcast/densops.hpp"

#include <optional>
#include <vector>

namespace qbcast {

// Broadcasting machine: a 2d x 2d unitary consuming the input qubit and a
// d-dimensional diagonal ancilla, emitting M clone qubits plus a residual
// system of dimension 2d / 2^M.
//
// Index conventions (fixed project-wide):
//   input index  = i_sys * d + i_anc          (system qubit most significant)
//   output index = j * block_dim + r, where j is the M-bit clone index with
//                  clone 0 as its most significant bit and r the residual.
struct BroadcastChannel {
    std::size_t d = 0;                    // ancilla dimension
    std::size_t M = 0;                    // copy count, >= 2
    ComplexMatrix U;                      // 2d x 2d, unitary within 1e-10
    std::vector<double> ancilla_spectrum; // d entries >= 0 summing to 1

    BroadcastChannel(std::size_t d, std::size_t M, ComplexMatrix U,
                     std::vector<double> ancilla_spectrum);

    std::size_t total_dim() const { return 2 * d; }
    std::size_t block_dim() const { return (2 * d) >> M; }
    // [2, 2, ..., 2, residual]; the residual factor is dropped when trivial
    std::vector<std::size_t> output_dims() const;
};

// U (rho_s x rho_anc) U^dag: the full joint output before marginalization.
DensityOperator apply_broadcast(const BroadcastChannel& ch, const DensityOperator& rho);

// Marginal of the joint output on one subsystem of output_dims() (or of the
// explicitly supplied factorization). copy_index 0..M-1 selects a clone.
DensityOperator clone_marginal(const BroadcastChannel& ch, const DensityOperator& rho,
                               std::size_t copy_index = 0,
                               std::span<const std::size_t> subsystem_dims = {});

// The |u^i_{j,k}> grid: block j (0..2^M-1) of the column that maps
// |i>|anc_k>, each of dimension block_dim. Lossless slicing of U.
struct BlockPartition {
    std::size_t M = 0;
    std::size_t d = 0;
    std::size_t block_dim = 0;
    std::vector<cplx> storage;  // layout [i][j][k][r]

    std::span<const cplx> u(std::size_t i, std::size_t j, std::size_t k) const;
    std::span<cplx> u(std::size_t i, std::size_t j, std::size_t k);
    ComplexMatrix reassemble() const;
};

BlockPartition extract_blocks(const BroadcastChannel& ch);

// Affine structure of the designated clone's entries over lambda:
//   x(lambda) = A lambda + B,  y(lambda) = C lambda + D,
// with the universality sums E_x = A + 2B and E_y = C + 2D.
struct ChannelCoefficients {
    double A = 0.0, B = 0.0;
    cplx C, D;
    double E_x = 0.0;
    cplx E_y;
    double delta = 0.0;  // phase of E_y (0 when E_y vanishes)
};

// Block sums for the clone at `copy_index`. For copy M-1 this is the
// literal "even k" pairing of adjacent blocks; other copies pair blocks
// across the matching bit of the clone index.
std::pair<double, cplx> block_coefficient_sums(const BlockPartition& bp,
                                               std::span<const double> ancilla_spectrum,
                                               std::size_t copy_index);

// Extracts A, B, C, D by simulating the marginal at lambda = 0 and 1, then
// cross-validates E_x, E_y against block_coefficient_sums (1e-9); a
// disagreement signals a basis-convention bug and throws.
ChannelCoefficients compute_coefficients(const BroadcastChannel& ch, double theta,
                                         double omega, std::size_t copy_index = 0);

// max |E_x - 1| and max |E_y| over the parameter grid; both vanish exactly
// when the channel satisfies the universality identity, which forces the
// maximally mixed input to be transmitted perfectly.
std::pair<double, double> universality_residual(const BroadcastChannel& ch,
                                                std::span<const double> theta_grid,
                                                std::span<const double> omega_grid,
                                                std::size_t copy_index = 0);

// The two d^2-vectors whose Gram entries reproduce B and D for the 1->2
// analysis, built from w_{i,j} = -sin(t) u^0_{i,j} + e^{i w} cos(t) u^1_{i,j}.
struct LVectors {
    std::vector<cplx> L0, L1;
    std::vector<std::vector<cplx>> w;  // w[i][j], i = 0..3, j = 0..d-1
};

LVectors build_l_vectors(const BroadcastChannel& ch, double theta, double omega);

struct SchwarzResult {
    bool saturated = false;
    std::optional<cplx> g;  // L0 = g L1 when saturated and L1 != 0
};

SchwarzResult schwarz_proportionality(const LVectors& lv);

// max over ancilla indices with positive weight of
// |<u^0_{1,i}|u^1_{1,i}> + <u^0_{3,i}|u^1_{3,i}>|  (1->2 diagnostic)
double orthogonality_residual(const BlockPartition& bp,
                              std::span<const double> ancilla_spectrum);

// Fits the theta-averaged lambda=0 fidelity
//   G(t) = [F(t) + F(-t)]/2  against  1/2 + (a/2) cos^2(2t),
// returning the coefficient and the max fit residual.
struct ThetaFit {
    double a = 0.0;
    double residual = 0.0;
};

ThetaFit theta_fit(const BroadcastChannel& ch, double omega,
                   std::span<const double> theta_samples, std::size_t copy_index = 0);

// Default probe grids; small, and including the degenerate endpoints.
std::vector<double> default_theta_grid();
std::vector<double> default_omega_grid();

// Convenience: U = I with a pure |anc_0> ancilla.
BroadcastChannel identity_channel(std::size_t d, std::size_t M);

}  // namespace qbcast
