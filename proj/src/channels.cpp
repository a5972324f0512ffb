#include "qbcast/channels.hpp"

#include "qbcast/fidelity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qbcast {

namespace {
constexpr double kUnitaryTol = 1e-10;
constexpr double kSpectrumTol = 1e-12;
constexpr double kCoefficientTol = 1e-9;

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}
}  // namespace

BroadcastChannel::BroadcastChannel(std::size_t d_, std::size_t M_, ComplexMatrix U_,
                                   std::vector<double> spectrum)
    : d(d_), M(M_), U(std::move(U_)), ancilla_spectrum(std::move(spectrum)) {
    if (M < 2) throw std::invalid_argument("broadcast channel needs M >= 2");
    if (U.rows() != 2 * d || U.cols() != 2 * d)
        throw std::invalid_argument("broadcast channel unitary must be 2d x 2d");
    if ((2 * d) % (std::size_t{1} << M) != 0)
        throw std::invalid_argument("broadcast channel: 2d not divisible by 2^M");
    if (!is_unitary(U, kUnitaryTol))
        throw std::invalid_argument("broadcast channel matrix not unitary");
    if (ancilla_spectrum.size() != d)
        throw std::invalid_argument("ancilla spectrum size must equal d");
    double sum = 0.0;
    for (double c : ancilla_spectrum) {
        if (c < 0.0) throw std::invalid_argument("ancilla spectrum entry negative");
        sum += c;
    }
    if (std::abs(sum - 1.0) > kSpectrumTol)
        throw std::invalid_argument("ancilla spectrum does not sum to 1");
}

std::vector<std::size_t> BroadcastChannel::output_dims() const {
    std::vector<std::size_t> dims(M, 2);
    if (block_dim() > 1) dims.push_back(block_dim());
    return dims;
}

DensityOperator apply_broadcast(const BroadcastChannel& ch, const DensityOperator& rho) {
    if (rho.dim() != 2)
        throw std::invalid_argument("apply_broadcast: input must be a qubit");
    const ComplexMatrix anc = ComplexMatrix::diagonal(ch.ancilla_spectrum);
    const ComplexMatrix joint_in = tensor(rho.matrix(), anc);
    return DensityOperator(ch.U * joint_in * ch.U.adjoint());
}

DensityOperator clone_marginal(const BroadcastChannel& ch, const DensityOperator& rho,
                               std::size_t copy_index,
                               std::span<const std::size_t> subsystem_dims) {
    std::vector<std::size_t> dims(subsystem_dims.begin(), subsystem_dims.end());
    if (dims.empty()) dims = ch.output_dims();
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    if (total != ch.total_dim())
        throw std::invalid_argument("clone_marginal: subsystem dims do not multiply to 2d");
    if (copy_index >= dims.size())
        throw std::invalid_argument("clone_marginal: copy index out of range");
    return partial_trace(apply_broadcast(ch, rho), dims, copy_index);
}

std::span<const cplx> BlockPartition::u(std::size_t i, std::size_t j, std::size_t k) const {
    const std::size_t blocks = std::size_t{1} << M;
    const std::size_t off = ((i * blocks + j) * d + k) * block_dim;
    return {storage.data() + off, block_dim};
}

std::span<cplx> BlockPartition::u(std::size_t i, std::size_t j, std::size_t k) {
    const std::size_t blocks = std::size_t{1} << M;
    const std::size_t off = ((i * blocks + j) * d + k) * block_dim;
    return {storage.data() + off, block_dim};
}

ComplexMatrix BlockPartition::reassemble() const {
    ComplexMatrix u_mat(2 * d, 2 * d);
    const std::size_t blocks = std::size_t{1} << M;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < blocks; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                auto blk = u(i, j, k);
                for (std::size_t r = 0; r < block_dim; ++r)
                    u_mat(j * block_dim + r, i * d + k) = blk[r];
            }
    return u_mat;
}

BlockPartition extract_blocks(const BroadcastChannel& ch) {
    BlockPartition bp;
    bp.M = ch.M;
    bp.d = ch.d;
    bp.block_dim = ch.block_dim();
    const std::size_t blocks = std::size_t{1} << ch.M;
    bp.storage.resize(2 * blocks * ch.d * bp.block_dim);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < blocks; ++j)
            for (std::size_t k = 0; k < ch.d; ++k) {
                auto blk = bp.u(i, j, k);
                for (std::size_t r = 0; r < bp.block_dim; ++r)
                    blk[r] = ch.U(j * bp.block_dim + r, i * ch.d + k);
            }
    return bp;
}

std::pair<double, cplx> block_coefficient_sums(const BlockPartition& bp,
                                               std::span<const double> ancilla_spectrum,
                                               std::size_t copy_index) {
    if (ancilla_spectrum.size() != bp.d)
        throw std::invalid_argument("block_coefficient_sums: spectrum size mismatch");
    if (copy_index >= bp.M)
        throw std::invalid_argument("block_coefficient_sums: copy index out of range");
    // clone c sits at bit M-1-c of the block index; for c = M-1 the pairing
    // below reduces to summing even j against j+1
    const std::size_t bit = bp.M - 1 - copy_index;
    const std::size_t stride = std::size_t{1} << bit;
    const std::size_t blocks = std::size_t{1} << bp.M;
    double ex = 0.0;
    cplx ey = 0.0;
    for (std::size_t k = 0; k < bp.d; ++k) {
        const double c = ancilla_spectrum[k];
        if (c == 0.0) continue;
        for (std::size_t j = 0; j < blocks; ++j) {
            if ((j >> bit) & 1u) continue;
            for (std::size_t i = 0; i < 2; ++i) {
                ex += c * inner(bp.u(i, j, k), bp.u(i, j, k)).real();
                ey += c * inner(bp.u(i, j + stride, k), bp.u(i, j, k));
            }
        }
    }
    return {ex, ey};
}

ChannelCoefficients compute_coefficients(const BroadcastChannel& ch, double theta,
                                         double omega, std::size_t copy_index) {
    auto entry_pair = [&](double lambda) {
        const DensityOperator marg =
            clone_marginal(ch, qubit_from_params({theta, omega, lambda}), copy_index);
        return std::pair<double, cplx>{marg(0, 0).real(), marg(0, 1)};
    };
    const auto [x0, y0] = entry_pair(0.0);
    const auto [x1, y1] = entry_pair(1.0);

    ChannelCoefficients co;
    co.B = x0;
    co.A = x1 - x0;
    co.D = y0;
    co.C = y1 - y0;
    co.E_x = co.A + 2.0 * co.B;
    co.E_y = co.C + 2.0 * co.D;

    const auto [bex, bey] =
        block_coefficient_sums(extract_blocks(ch), ch.ancilla_spectrum, copy_index);
    if (std::abs(co.E_x - bex) > kCoefficientTol || std::abs(co.E_y - bey) > kCoefficientTol)
        throw std::runtime_error(
            "compute_coefficients: simulated sums disagree with block sums "
            "(basis-convention bug): |dEx|=" +
            std::to_string(std::abs(co.E_x - bex)) +
            " |dEy|=" + std::to_string(std::abs(co.E_y - bey)));

    co.delta = std::abs(co.E_y) > 1e-15 ? std::arg(co.E_y) : 0.0;
    return co;
}

std::pair<double, double> universality_residual(const BroadcastChannel& ch,
                                                std::span<const double> theta_grid,
                                                std::span<const double> omega_grid,
                                                std::size_t copy_index) {
    double rx = 0.0, ry = 0.0;
    for (double theta : theta_grid)
        for (double omega : omega_grid) {
            const ChannelCoefficients co = compute_coefficients(ch, theta, omega, copy_index);
            rx = std::max(rx, std::abs(co.E_x - 1.0));
            ry = std::max(ry, std::abs(co.E_y));
        }
    return {rx, ry};
}

LVectors build_l_vectors(const BroadcastChannel& ch, double theta, double omega) {
    if (ch.M != 2)
        throw std::invalid_argument("build_l_vectors: defined for 1->2 channels only");
    const BlockPartition bp = extract_blocks(ch);
    const cplx phase = std::polar(1.0, omega);
    const double s = std::sin(theta), c = std::cos(theta);

    LVectors lv;
    lv.w.assign(4, std::vector<cplx>(ch.d * bp.block_dim));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < ch.d; ++k) {
            auto u0 = bp.u(0, i, k);
            auto u1 = bp.u(1, i, k);
            for (std::size_t r = 0; r < bp.block_dim; ++r)
                lv.w[i][k * bp.block_dim + r] = -s * u0[r] + phase * c * u1[r];
        }

    auto stack = [&](std::size_t lo, std::size_t hi, std::vector<cplx>& out) {
        out.clear();
        out.reserve(ch.d * 2 * bp.block_dim);
        for (std::size_t k = 0; k < ch.d; ++k) {
            const double root = std::sqrt(ch.ancilla_spectrum[k]);
            for (std::size_t r = 0; r < bp.block_dim; ++r)
                out.push_back(root * lv.w[lo][k * bp.block_dim + r]);
            for (std::size_t r = 0; r < bp.block_dim; ++r)
                out.push_back(root * lv.w[hi][k * bp.block_dim + r]);
        }
    };
    stack(0, 2, lv.L0);
    stack(1, 3, lv.L1);
    return lv;
}

SchwarzResult schwarz_proportionality(const LVectors& lv) {
    const double n0 = inner(lv.L0, lv.L0).real();
    const double n1 = inner(lv.L1, lv.L1).real();
    const cplx ip = inner(lv.L1, lv.L0);
    SchwarzResult r;
    r.saturated = n0 * n1 - std::norm(ip) < 1e-9;
    if (r.saturated && n1 > 1e-15) r.g = ip / n1;
    return r;
}

double orthogonality_residual(const BlockPartition& bp,
                              std::span<const double> ancilla_spectrum) {
    if (bp.M != 2)
        throw std::invalid_argument("orthogonality_residual: defined for 1->2 channels only");
    double worst = 0.0;
    for (std::size_t i = 0; i < bp.d; ++i) {
        if (ancilla_spectrum[i] <= 0.0) continue;
        const cplx v = inner(bp.u(0, 1, i), bp.u(1, 1, i)) +
                       inner(bp.u(0, 3, i), bp.u(1, 3, i));
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

ThetaFit theta_fit(const BroadcastChannel& ch, double omega,
                   std::span<const double> theta_samples, std::size_t copy_index) {
    if (ch.M != 2)
        throw std::invalid_argument("theta_fit: defined for 1->2 channels only");
    std::vector<double> g(theta_samples.size()), model_c(theta_samples.size());
    for (std::size_t i = 0; i < theta_samples.size(); ++i) {
        const double t = theta_samples[i];
        auto fid = [&](double theta) {
            const QubitParams p{theta, omega, 0.0};
            return uhlmann_fidelity(clone_marginal(ch, qubit_from_params(p), copy_index),
                                    qubit_from_params(p));
        };
        g[i] = 0.5 * (fid(t) + fid(-t));
        const double c2 = std::cos(2.0 * t);
        model_c[i] = c2 * c2;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        num += model_c[i] * (g[i] - 0.5);
        den += model_c[i] * model_c[i];
    }
    ThetaFit fit;
    fit.a = den > 0.0 ? 2.0 * num / den : 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        fit.residual = std::max(fit.residual,
                                std::abs(g[i] - 0.5 - 0.5 * fit.a * model_c[i]));
    return fit;
}

std::vector<double> default_theta_grid() {
    const double pi = std::numbers::pi;
    return {0.0, pi / 8.0, pi / 4.0, 3.0 * pi / 8.0, pi / 2.0};
}

std::vector<double> default_omega_grid() {
    const double pi = std::numbers::pi;
    return {0.0, pi / 3.0, 2.0 * pi / 3.0, pi, 3.0 * pi / 2.0};
}

BroadcastChannel identity_channel(std::size_t d, std::size_t M) {
    std::vector<double> spectrum(d, 0.0);
    spectrum[0] = 1.0;
    return BroadcastChannel(d, M, ComplexMatrix::identity(2 * d), std::move(spectrum));
}

}  // namespace qbcast
