#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace qbcast {

using cplx = std::complex<double>;

// Dense row-major complex matrix. The workhorse for states, unitaries and
// channel blocks; everything in this library is small and dense.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const double> d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::span<cplx> data() { return a_; }
    std::span<const cplx> data() const { return a_; }

    ComplexMatrix adjoint() const;
    cplx trace() const;
    bool all_finite() const;

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(cplx s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

// Kronecker product with index convention (i_a * dim_b + i_b): the left
// factor is the most significant one.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
std::vector<cplx> tensor(std::span<const cplx> a, std::span<const cplx> b);

// |v><w|
ComplexMatrix outer(std::span<const cplx> v, std::span<const cplx> w);

double max_abs(const ComplexMatrix& m);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// true iff max elementwise |U^dag U - I| <= tol
bool is_unitary(const ComplexMatrix& u, double tol);

// Eigendecomposition of a Hermitian matrix; eigenvalues ascending,
// eigenvectors as columns. The only matrix factorization the library
// assumes of its backend.
struct EighResult {
    std::vector<double> eigenvalues;
    ComplexMatrix eigenvectors;
};
EighResult eigh(const ComplexMatrix& hermitian);

// Completes orthonormal columns, given at fixed column positions of an
// n x n matrix, to a full unitary. The free positions are filled in
// ascending order from canonical basis vectors orthogonalized against
// everything accepted so far; `candidate_order` permutes the candidate
// basis (default: e_0, e_1, ...). Deterministic.
ComplexMatrix complete_unitary(
    std::size_t n,
    const std::vector<std::pair<std::size_t, std::vector<cplx>>>& specified,
    std::span<const std::size_t> candidate_order = {});

// The triple (theta, omega, lambda) identifying a mixed qubit:
//   rho = lambda |psi><psi| + (1-lambda) |psi_perp><psi_perp|
//   |psi>      =  cos(theta)|0> + e^{i omega} sin(theta)|1>
//   |psi_perp> = -sin(theta)|0> + e^{i omega} cos(theta)|1>
struct QubitParams {
    double theta = 0.0;
    double omega = 0.0;
    double lambda = 0.0;
};

struct BlochVector {
    double x = 0.0, y = 0.0, z = 0.0;
    double norm() const;
};

// Positive-semidefinite unit-trace Hermitian matrix. The constructor
// enforces Hermiticity (1e-12 max elementwise) and unit trace (1e-12);
// positivity is checked where operations require it.
class DensityOperator {
public:
    explicit DensityOperator(ComplexMatrix m);

    static DensityOperator maximally_mixed(std::size_t dim);
    static DensityOperator pure(std::span<const cplx> state);

    std::size_t dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    double min_eigenvalue() const;

private:
    ComplexMatrix m_;
};

std::vector<cplx> qubit_state(double theta, double omega);        // |psi>
std::vector<cplx> qubit_state_perp(double theta, double omega);   // |psi_perp>

DensityOperator qubit_from_params(const QubitParams& p);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

// Marginal on subsystem `keep` of a state on the composite space with the
// given factor dimensions; subsystem 0 is the most significant index.
DensityOperator partial_trace(const DensityOperator& rho,
                              std::span<const std::size_t> dims,
                              std::size_t keep);

// Hermitian PSD square root. Eigenvalues below -1e-8 are a hard error;
// eigenvalues in [-1e-8, 0) are clamped to zero.
ComplexMatrix mat_sqrt_psd(const DensityOperator& rho);

BlochVector bloch_vector(const DensityOperator& rho);  // 2x2 only
BlochVector bloch_roundtrip(const QubitParams& p);

}  // namespace qbcast
