#include "qbcast/densops.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace qbcast {

namespace {

using EigenRowMajor =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPsdErrorFloor = -1e-8;  // below: modeling error, not noise

}  // namespace

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

cplx ComplexMatrix::trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

bool ComplexMatrix::all_finite() const {
    for (const cplx& z : a_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("matrix shape mismatch in addition");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("matrix shape mismatch in subtraction");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (cplx& z : a_) z *= s;
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matrix shape mismatch in product");
    ComplexMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    }
    return r;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            const cplx v = a(ia, ja);
            if (v == cplx{}) continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    r(ia * b.rows() + ib, ja * b.cols() + jb) = v * b(ib, jb);
        }
    return r;
}

std::vector<cplx> tensor(std::span<const cplx> a, std::span<const cplx> b) {
    std::vector<cplx> r(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
    return r;
}

ComplexMatrix outer(std::span<const cplx> v, std::span<const cplx> w) {
    ComplexMatrix r(v.size(), w.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) r(i, j) = v[i] * std::conj(w[j]);
    return r;
}

double max_abs(const ComplexMatrix& m) {
    double mx = 0.0;
    for (const cplx& z : m.data()) mx = std::max(mx, std::abs(z));
    return mx;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("matrix shape mismatch in comparison");
    double mx = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        mx = std::max(mx, std::abs(a.data()[i] - b.data()[i]));
    return mx;
}

bool is_unitary(const ComplexMatrix& u, double tol) {
    if (!u.square()) throw std::invalid_argument("is_unitary: matrix not square");
    ComplexMatrix g = u.adjoint() * u;
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
    return max_abs(g) <= tol;
}

EighResult eigh(const ComplexMatrix& hermitian) {
    if (!hermitian.square()) throw std::invalid_argument("eigh: matrix not square");
    const std::size_t n = hermitian.rows();
    Eigen::Map<const EigenRowMajor> m(hermitian.data().data(), n, n);
    Eigen::SelfAdjointEigenSolver<EigenRowMajor> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigh: eigendecomposition failed");

    EighResult r;
    r.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    r.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            r.eigenvectors(i, j) = solver.eigenvectors()(i, j);
    return r;
}

ComplexMatrix complete_unitary(
    std::size_t n,
    const std::vector<std::pair<std::size_t, std::vector<cplx>>>& specified,
    std::span<const std::size_t> candidate_order) {
    ComplexMatrix u(n, n);
    std::vector<std::vector<cplx>> accepted;
    std::vector<bool> taken(n, false);

    auto norm2 = [](const std::vector<cplx>& v) {
        double s = 0.0;
        for (const cplx& z : v) s += std::norm(z);
        return s;
    };
    auto project_out = [&](std::vector<cplx>& v) {
        for (const auto& q : accepted) {
            cplx ip = 0.0;
            for (std::size_t i = 0; i < n; ++i) ip += std::conj(q[i]) * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= ip * q[i];
        }
    };

    for (const auto& [col, vec] : specified) {
        if (col >= n || vec.size() != n)
            throw std::invalid_argument("complete_unitary: bad specified column");
        std::vector<cplx> v = vec;
        if (std::abs(norm2(v) - 1.0) > 1e-9)
            throw std::invalid_argument("complete_unitary: specified column not normalized");
        project_out(v);
        if (norm2(v) < 1.0 - 1e-9)
            throw std::invalid_argument("complete_unitary: specified columns not orthogonal");
        accepted.push_back(v);
        taken[col] = true;
        for (std::size_t i = 0; i < n; ++i) u(i, col) = v[i];
    }

    std::vector<std::size_t> order(candidate_order.begin(), candidate_order.end());
    if (order.empty()) {
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
    }

    std::size_t next_free = 0;
    for (std::size_t cand : order) {
        if (accepted.size() == n) break;
        std::vector<cplx> v(n);
        v[cand] = 1.0;
        project_out(v);
        double s = norm2(v);
        if (s < 1e-12) continue;
        for (cplx& z : v) z /= std::sqrt(s);
        project_out(v);  // second pass keeps orthogonality tight
        s = norm2(v);
        if (s < 0.5) continue;
        for (cplx& z : v) z /= std::sqrt(s);
        accepted.push_back(v);
        while (taken[next_free]) ++next_free;
        taken[next_free] = true;
        for (std::size_t i = 0; i < n; ++i) u(i, next_free) = v[i];
    }
    if (accepted.size() != n)
        throw std::runtime_error("complete_unitary: completion did not span");
    return u;
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityOperator::DensityOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (!m_.square()) throw std::invalid_argument("density operator must be square");
    if (!m_.all_finite()) throw std::invalid_argument("density operator has non-finite entries");
    double herm = 0.0;
    for (std::size_t i = 0; i < m_.rows(); ++i)
        for (std::size_t j = i; j < m_.cols(); ++j)
            herm = std::max(herm, std::abs(m_(i, j) - std::conj(m_(j, i))));
    if (herm > kHermitianTol)
        throw std::invalid_argument("density operator not Hermitian (deviation " +
                                    std::to_string(herm) + ")");
    if (std::abs(m_.trace() - cplx{1.0}) > kTraceTol)
        throw std::invalid_argument("density operator trace differs from 1");
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
    ComplexMatrix m = ComplexMatrix::identity(dim);
    m *= cplx{1.0 / static_cast<double>(dim)};
    return DensityOperator(std::move(m));
}

DensityOperator DensityOperator::pure(std::span<const cplx> state) {
    double s = 0.0;
    for (const cplx& z : state) s += std::norm(z);
    if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("pure state vector not normalized");
    return DensityOperator(outer(state, state));
}

double DensityOperator::min_eigenvalue() const {
    return eigh(m_).eigenvalues.front();
}

std::vector<cplx> qubit_state(double theta, double omega) {
    return {std::cos(theta), std::polar(1.0, omega) * std::sin(theta)};
}

std::vector<cplx> qubit_state_perp(double theta, double omega) {
    return {-std::sin(theta), std::polar(1.0, omega) * std::cos(theta)};
}

DensityOperator qubit_from_params(const QubitParams& p) {
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0))
        throw std::invalid_argument("lambda outside [0,1]");
    if (!std::isfinite(p.theta) || !std::isfinite(p.omega))
        throw std::invalid_argument("theta/omega not finite");
    const auto psi = qubit_state(p.theta, p.omega);
    const auto perp = qubit_state_perp(p.theta, p.omega);
    ComplexMatrix m = outer(psi, psi);
    m *= cplx{p.lambda};
    ComplexMatrix m2 = outer(perp, perp);
    m2 *= cplx{1.0 - p.lambda};
    m += m2;
    // kill rounding in the imaginary parts of the diagonal
    for (std::size_t i = 0; i < 2; ++i) m(i, i) = cplx{m(i, i).real(), 0.0};
    return DensityOperator(std::move(m));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator(tensor(a.matrix(), b.matrix()));
}

DensityOperator partial_trace(const DensityOperator& rho,
                              std::span<const std::size_t> dims,
                              std::size_t keep) {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    if (total != rho.dim())
        throw std::invalid_argument("partial_trace: subsystem dims do not multiply to the state dim");
    if (keep >= dims.size())
        throw std::invalid_argument("partial_trace: keep index out of range");

    std::size_t left = 1, right = 1;
    for (std::size_t i = 0; i < keep; ++i) left *= dims[i];
    for (std::size_t i = keep + 1; i < dims.size(); ++i) right *= dims[i];
    const std::size_t mid = dims[keep];

    ComplexMatrix out(mid, mid);
    for (std::size_t l = 0; l < left; ++l)
        for (std::size_t r = 0; r < right; ++r)
            for (std::size_t m = 0; m < mid; ++m)
                for (std::size_t m2 = 0; m2 < mid; ++m2) {
                    const std::size_t row = (l * mid + m) * right + r;
                    const std::size_t col = (l * mid + m2) * right + r;
                    out(m, m2) += rho(row, col);
                }
    return DensityOperator(std::move(out));
}

ComplexMatrix mat_sqrt_psd(const DensityOperator& rho) {
    EighResult e = eigh(rho.matrix());
    const std::size_t n = rho.dim();
    std::vector<double> roots(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = e.eigenvalues[i];
        if (v < kPsdErrorFloor)
            throw std::invalid_argument("mat_sqrt_psd: eigenvalue " + std::to_string(v) +
                                        " below PSD tolerance");
        roots[i] = std::sqrt(std::max(v, 0.0));
    }
    // V diag(sqrt) V^dag, assembled symmetrically so Hermiticity is exact
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        if (roots[k] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = e.eigenvectors(i, k) * roots[k];
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += vik * std::conj(e.eigenvectors(j, k));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = cplx{out(i, i).real(), 0.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx avg = 0.5 * (out(i, j) + std::conj(out(j, i)));
            out(i, j) = avg;
            out(j, i) = std::conj(avg);
        }
    }
    return out;
}

BlochVector bloch_vector(const DensityOperator& rho) {
    if (rho.dim() != 2) throw std::invalid_argument("bloch_vector: state not a qubit");
    BlochVector b;
    b.x = 2.0 * rho(0, 1).real();
    b.y = -2.0 * rho(0, 1).imag();
    b.z = (rho(0, 0) - rho(1, 1)).real();
    return b;
}

BlochVector bloch_roundtrip(const QubitParams& p) {
    return bloch_vector(qubit_from_params(p));
}

}  // namespace qbcast
