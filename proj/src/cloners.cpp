#include "qbcast/cloners.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbcast {

namespace {

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

// amplitude of basis state `bits` in the M-qubit Dicke state with k ones
double dicke_amp(std::size_t M, std::size_t k, std::size_t bits) {
    if (static_cast<std::size_t>(std::popcount(bits)) != k) return 0.0;
    return 1.0 / std::sqrt(binomial(M, k));
}

std::vector<double> pure_ancilla(std::size_t d) {
    std::vector<double> spectrum(d, 0.0);
    spectrum[0] = 1.0;
    return spectrum;
}

std::vector<cplx> tensor_power(std::span<const cplx> v, std::size_t n) {
    std::vector<cplx> out{1.0};
    for (std::size_t i = 0; i < n; ++i) out = tensor(out, v);
    return out;
}

}  // namespace

BroadcastChannel omega_dqcm(double omega, std::span<const std::size_t> completion_order) {
    const double pi = std::numbers::pi;
    const cplx a = 0.5 * std::polar(1.0, -2.0 * omega + pi);
    const cplx b = 0.5 * std::polar(1.0, -omega + pi / 2.0);
    const std::vector<cplx> col0{a, 0.0, b, 0.0, b, 0.0, 0.5, 0.0};
    const std::vector<cplx> col4{0.0, a, 0.0, b, 0.0, b, 0.0, 0.5};
    ComplexMatrix u = complete_unitary(8, {{0, col0}, {4, col4}}, completion_order);
    return BroadcastChannel(4, 2, std::move(u), pure_ancilla(4));
}

DensityOperator scaling_channel_output(const QubitParams& p, double z) {
    if (!(z >= 0.0 && z <= 1.0))
        throw std::invalid_argument("scaling_channel_output: z outside [0,1]");
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0))
        throw std::invalid_argument("scaling_channel_output: lambda outside [0,1]");
    // weight of |psi><psi| after the rescale
    const double lam_out = p.lambda * z + (1.0 - p.lambda) * (1.0 - z);
    return qubit_from_params({p.theta, p.omega, lam_out});
}

double fidelity_lambda_z(double lambda, double z) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("fidelity_lambda_z: lambda outside [0,1]");
    if (!(z >= 0.0 && z <= 1.0))
        throw std::invalid_argument("fidelity_lambda_z: z outside [0,1]");
    const double t1 = std::sqrt((lambda * (1.0 - z) + (1.0 - lambda) * z) * (1.0 - lambda));
    const double t2 = std::sqrt((lambda * z + (1.0 - lambda) * (1.0 - z)) * lambda);
    return (t1 + t2) * (t1 + t2);
}

double optimal_scaling_weight(std::size_t M) {
    if (M < 2) throw std::invalid_argument("optimal_scaling_weight: M must be >= 2");
    return (2.0 * static_cast<double>(M) + 1.0) / (3.0 * static_cast<double>(M));
}

double optimal_mixed_fidelity(std::size_t M, double lambda) {
    return fidelity_lambda_z(lambda, optimal_scaling_weight(M));
}

BroadcastChannel gisin_massar_channel(std::size_t M) {
    if (M < 2 || M > 6)
        throw std::invalid_argument("gisin_massar_channel: M outside [2,6]");
    const std::size_t clone_dim = std::size_t{1} << M;
    const std::size_t n = clone_dim * M;  // M clone qubits x M machine levels
    const std::size_t d = n / 2;

    std::vector<double> alpha(M);
    for (std::size_t j = 0; j < M; ++j)
        alpha[j] = std::sqrt(2.0 * static_cast<double>(M - j) /
                             (static_cast<double>(M) * static_cast<double>(M + 1)));

    // |0> -> sum_j alpha_j |D^M_j> |m_j>
    std::vector<cplx> col0(n, 0.0);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t bits = 0; bits < clone_dim; ++bits)
            col0[bits * M + j] += alpha[j] * dicke_amp(M, j, bits);

    // |1> -> sum_j alpha_{M-1-j} |D^M_{j+1}> |m_j>
    std::vector<cplx> col1(n, 0.0);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t bits = 0; bits < clone_dim; ++bits)
            col1[bits * M + j] += alpha[M - 1 - j] * dicke_amp(M, j + 1, bits);

    ComplexMatrix u = complete_unitary(n, {{0, col0}, {d, col1}});
    return BroadcastChannel(d, M, std::move(u), pure_ancilla(d));
}

NMScalingParams nm_scaling_params(std::size_t N, std::size_t M) {
    if (N < 1 || N > M)
        throw std::invalid_argument("nm_scaling_params: need 1 <= N <= M");
    const double n = static_cast<double>(N), m = static_cast<double>(M);
    NMScalingParams p;
    p.z = (n * m + m + n) / (m * (n + 2.0));
    p.f = (n / m) * (m + 2.0) / (n + 2.0);
    return p;
}

BroadcastChannel known_basis_broadcaster(double theta, double omega, std::size_t M) {
    if (M < 2) throw std::invalid_argument("known_basis_broadcaster: M must be >= 2");
    const std::size_t n = std::size_t{1} << M;
    const std::size_t d = n / 2;
    const auto psi_m = tensor_power(qubit_state(theta, omega), M);
    const auto perp_m = tensor_power(qubit_state_perp(theta, omega), M);

    // the images of |0>|0...0> and |1>|0...0> that realize
    // |psi>|0...0> -> |psi>^M and |psi_perp>|0...0> -> |psi_perp>^M
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx conj_phase = std::polar(1.0, -omega);
    std::vector<cplx> col0(n), col_d(n);
    for (std::size_t i = 0; i < n; ++i) {
        col0[i] = c * psi_m[i] - s * perp_m[i];
        col_d[i] = conj_phase * (s * psi_m[i] + c * perp_m[i]);
    }
    ComplexMatrix u = complete_unitary(n, {{0, col0}, {d, col_d}});
    return BroadcastChannel(d, M, std::move(u), pure_ancilla(d));
}

bool commutes(const DensityOperator& r1, const DensityOperator& r2, double tol) {
    if (r1.dim() != r2.dim())
        throw std::invalid_argument("commutes: dimension mismatch");
    return max_abs_diff(r1.matrix() * r2.matrix(), r2.matrix() * r1.matrix()) < tol;
}

}  // namespace qbcast
