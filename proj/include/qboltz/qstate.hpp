#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qboltz/errors.hpp"

namespace qboltz {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double psd = 1e-10;
inline constexpr double projector = 1e-12;
inline constexpr double unitary = 1e-12;
inline constexpr double norm = 1e-12;
inline constexpr double zero_weight = 1e-14;
inline constexpr double eigen_clip = 1e-12;
}  // namespace tol

/// Largest entry modulus. This is the "max-entry metric" used by every
/// invariant check in the library.
double max_abs(const Matrix& m);

Matrix identity(Index dim);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// Eigenvalues of a Hermitian matrix, ascending.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);
bool is_hermitian(const Matrix& m, double tolerance = tol::hermitian);
bool is_positive_semidefinite(const Matrix& m, double tolerance = tol::psd);

class PureState {
public:
    /// Throws InvalidState unless the Euclidean norm is 1 within tol::norm.
    explicit PureState(Vector amplitudes);

    /// Computational basis vector |k>. Index 0 is spin up (sigma3 = +1).
    static PureState basis(Index dim, Index k);

    Index dim() const { return amplitudes_.size(); }
    const Vector& amplitudes() const { return amplitudes_; }

private:
    Vector amplitudes_;
};

class DensityMatrix {
public:
    enum class Check {
        full,        ///< Hermitian, unit trace and eigenvalues >= -tol::psd
        structural,  ///< Hermitian and unit trace only (skips the eigensolve)
    };

    /// Validates the invariants, then stores the exactly Hermitian part.
    explicit DensityMatrix(Matrix m, Check check = Check::full);

    static DensityMatrix from_pure(const PureState& psi);
    static DensityMatrix maximally_mixed(Index dim);

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

    /// Eigenvalues clipped at zero, ascending.
    Eigen::VectorXd spectrum() const;

private:
    Matrix m_;
};

/// Orthogonal resolution of the identity {P_alpha} with a real label per
/// member. Families whose members are all diagonal in the computational basis
/// are stored as a cell index per basis vector; all operations below take an
/// O(dim^2) path for them, which keeps 2^12-dimensional chains tractable.
class ProjectorFamily {
public:
    /// Dense members. Throws InvalidState when idempotence, Hermiticity,
    /// mutual orthogonality or completeness fails within tol::projector.
    /// Empty `labels` means labels 0, 1, 2, ...
    static ProjectorFamily from_projectors(std::vector<Matrix> members, std::vector<double> labels = {});

    /// Diagonal family: basis vector i belongs to member cell_of_basis[i].
    /// Every member index in [0, labels.size()) must be used at least once.
    static ProjectorFamily from_cells(std::vector<int> cell_of_basis, std::vector<double> labels);

    static ProjectorFamily trivial(Index dim);
    static ProjectorFamily computational(Index dim);

    Index dim() const { return dim_; }
    std::size_t size() const { return labels_.size(); }
    double label(std::size_t alpha) const { return labels_.at(alpha); }
    const std::vector<double>& labels() const { return labels_; }

    bool is_diagonal() const { return dense_.empty(); }
    /// Cell index per basis vector; only meaningful when is_diagonal().
    const std::vector<int>& cells() const { return cells_; }

    /// Materializes member alpha as a dim x dim matrix.
    Matrix member(std::size_t alpha) const;

    /// identity(left_dim) (x) P_alpha for every member, with the new factor as
    /// the slow index. Diagonal families stay diagonal.
    ProjectorFamily lift_left(Index left_dim) const;

private:
    ProjectorFamily() = default;

    Index dim_ = 0;
    std::vector<double> labels_;
    std::vector<int> cells_;
    std::vector<Matrix> dense_;
};

class UnitaryMap {
public:
    /// Throws InvalidState unless U^dagger U = 1 within tol::unitary.
    explicit UnitaryMap(Matrix u);

    static UnitaryMap identity(Index dim);

    /// exp(i t H) for Hermitian H, built from the eigendecomposition of H.
    static UnitaryMap exp_i(const Matrix& generator, double t = 1.0);

    Index dim() const { return u_.rows(); }
    const Matrix& matrix() const { return u_; }

    DensityMatrix apply(const DensityMatrix& rho) const;
    PureState apply(const PureState& psi) const;

    /// (a * b) applies b first.
    friend UnitaryMap operator*(const UnitaryMap& a, const UnitaryMap& b);

private:
    struct Trusted {};
    UnitaryMap(Matrix u, Trusted) : u_(std::move(u)) {}

    Matrix u_;
};

/// Trace-preserving completely positive map rho -> sum_i K_i rho K_i^dagger.
class KrausMap {
public:
    /// All operators must share one shape (dim_out x dim_in) and satisfy
    /// sum_i K_i^dagger K_i = 1 within tol::unitary.
    explicit KrausMap(std::vector<Matrix> operators);

    Index dim_in() const { return ops_.front().cols(); }
    Index dim_out() const { return ops_.front().rows(); }
    const std::vector<Matrix>& operators() const { return ops_; }

    DensityMatrix apply(const DensityMatrix& rho) const;

private:
    std::vector<Matrix> ops_;
};

/// Kronecker product. The left operand is the slow index:
/// tensor(a, b)(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l).
/// Products of more factors associate left: tensor(tensor(a, b), c), so the
/// leftmost factor is always the slowest.
Matrix tensor(const Matrix& a, const Matrix& b);
Vector tensor(const Vector& a, const Vector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
PureState tensor(const PureState& a, const PureState& b);

/// Embeds a single-factor operator at position `site` of the product space
/// described by factor_dims (identity elsewhere).
Matrix embed_site(const Matrix& op, std::size_t site, std::span<const Index> factor_dims);

/// Pinching sum_alpha P_alpha rho P_alpha.
DensityMatrix pinch(const DensityMatrix& rho, const ProjectorFamily& family);

struct ConditionalState {
    DensityMatrix state;
    double weight;
};

/// (P_alpha rho P_alpha / w, w) with w = Tr(rho P_alpha). Throws ZeroWeight
/// when w <= tol::zero_weight.
ConditionalState conditional_state(const DensityMatrix& rho, std::size_t alpha, const ProjectorFamily& family);

/// Branch weights Tr(rho P_alpha) for every member, clipped at 0.
std::vector<double> branch_weights(const DensityMatrix& rho, const ProjectorFamily& family);

/// Reduced state on the factors listed in `keep` (any order; the result
/// keeps the original factor order).
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const Index> factor_dims,
                            std::span<const std::size_t> keep);

/// || |psi1><psi1| - |psi2><psi2| ||_1 = 2 sqrt(1 - |<psi1, psi2>|^2).
double trace_norm_pure_diff(const PureState& psi1, const PureState& psi2);

/// max_alpha ||[P_alpha, rho]||_max <= tolerance.
bool is_decoherent(const DensityMatrix& rho, const ProjectorFamily& family, double tolerance);

/// max_alpha ||[P_alpha, rho]||_max.
double commutator_defect(const DensityMatrix& rho, const ProjectorFamily& family);

/// (1/N) sum_i Re Tr(rho O_i). The operators must already act on rho's space.
double mean_observable(const DensityMatrix& rho, std::span<const Matrix> site_operators);

}  // namespace qboltz
