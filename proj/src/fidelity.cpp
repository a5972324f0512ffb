#include "qbcast/fidelity.hpp"

#include <cmath>
#include <stdexcept>

namespace qbcast {

namespace {
constexpr double kEigenClamp = -1e-10;
// eigenvalues and determinants this close to zero are rounding residue of
// rank-deficient states; sqrt would amplify them to ~1e-8
constexpr double kRankNoiseFloor = 1e-14;
constexpr double kScalingResidual = 1e-9;
}  // namespace

double uhlmann_fidelity(const DensityOperator& r1, const DensityOperator& r2) {
    if (r1.dim() != r2.dim())
        throw std::invalid_argument("uhlmann_fidelity: dimension mismatch");
    const ComplexMatrix s = mat_sqrt_psd(r1);
    ComplexMatrix inner = s * r2.matrix() * s;
    // symmetrize away the product rounding before the eigensolve
    for (std::size_t i = 0; i < inner.rows(); ++i) {
        inner(i, i) = cplx{inner(i, i).real(), 0.0};
        for (std::size_t j = i + 1; j < inner.cols(); ++j) {
            const cplx avg = 0.5 * (inner(i, j) + std::conj(inner(j, i)));
            inner(i, j) = avg;
            inner(j, i) = std::conj(avg);
        }
    }
    double tr = 0.0;
    for (double v : eigh(inner).eigenvalues) {
        if (v < kEigenClamp)
            throw std::runtime_error("uhlmann_fidelity: product eigenvalue below clamp");
        if (v < kRankNoiseFloor) continue;
        tr += std::sqrt(v);
    }
    return tr * tr;
}

double qubit_fidelity_closed_form(double x, cplx y, const QubitParams& p) {
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0))
        throw std::invalid_argument("qubit_fidelity_closed_form: lambda outside [0,1]");
    const double l = p.lambda;
    const double det_out = x - x * x - std::norm(y);
    const double radicand = (l - l * l) * det_out;
    if (radicand < -1e-10)
        throw std::invalid_argument("qubit_fidelity_closed_form: negative radicand");
    const double bloch_in = 2.0 * l - 1.0;
    return 0.5 + 0.5 * bloch_in * (2.0 * x - 1.0) * std::cos(2.0 * p.theta) +
           0.5 * bloch_in * 2.0 * (std::polar(1.0, p.omega) * y).real() *
               std::sin(2.0 * p.theta) +
           2.0 * std::sqrt(std::max(radicand, 0.0));
}

double qubit_fidelity_direct(const DensityOperator& r1, const DensityOperator& r2) {
    if (r1.dim() != 2 || r2.dim() != 2)
        throw std::invalid_argument("qubit_fidelity_direct: states must be qubits");
    const double tr_prod = r1(0, 0).real() * r2(0, 0).real() +
                           r1(1, 1).real() * r2(1, 1).real() +
                           2.0 * (r1(0, 1) * std::conj(r2(0, 1))).real();
    double det1 = r1(0, 0).real() * r1(1, 1).real() - std::norm(r1(0, 1));
    double det2 = r2(0, 0).real() * r2(1, 1).real() - std::norm(r2(0, 1));
    if (det1 < kRankNoiseFloor) det1 = 0.0;
    if (det2 < kRankNoiseFloor) det2 = 0.0;
    return tr_prod + 2.0 * std::sqrt(det1 * det2);
}

std::optional<double> shrinking_factor(const DensityOperator& rho_in,
                                       const DensityOperator& rho_out) {
    if (rho_in.dim() != 2 || rho_out.dim() != 2)
        throw std::invalid_argument("shrinking_factor: states must be qubits");
    const BlochVector in = bloch_vector(rho_in);
    const BlochVector out = bloch_vector(rho_out);
    const double in_sq = in.x * in.x + in.y * in.y + in.z * in.z;
    if (in_sq < 1e-24) return std::nullopt;  // f not identifiable at the center

    // solve f on the Bloch vectors, then validate every matrix entry
    const double f = (out.x * in.x + out.y * in.y + out.z * in.z) / in_sq;
    ComplexMatrix model = ComplexMatrix::identity(2);
    model *= cplx{(1.0 - f) / 2.0};
    ComplexMatrix scaled = rho_in.matrix();
    scaled *= cplx{f};
    model += scaled;
    if (max_abs_diff(model, rho_out.matrix()) >= kScalingResidual) return std::nullopt;
    return f;
}

}  // namespace qbcast
