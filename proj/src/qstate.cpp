#include "qboltz/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qboltz {

namespace {

std::string describe(const char* what, double value) {
    std::ostringstream os;
    os << what << " (deviation " << value << ")";
    return os.str();
}

Index product(std::span<const Index> dims) {
    return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

// Tr(a b) without forming the product.
Complex trace_of_product(const Matrix& a, const Matrix& b) {
    return a.transpose().cwiseProduct(b).sum();
}

void require_same_dim(Index a, Index b, const char* where) {
    if (a != b) {
        std::ostringstream os;
        os << where << ": dimension " << a << " does not match " << b;
        throw DimensionMismatch(os.str());
    }
}

}  // namespace

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Matrix identity(Index dim) {
    return Matrix::Identity(dim, dim);
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

bool is_hermitian(const Matrix& m, double tolerance) {
    return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tolerance;
}

bool is_positive_semidefinite(const Matrix& m, double tolerance) {
    if (!is_hermitian(m, tolerance)) {
        return false;
    }
    const Matrix h = (m + m.adjoint()) / 2.0;
    return hermitian_eigenvalues(h).minCoeff() >= -tolerance;
}

// ---------------------------------------------------------------- PureState

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) {
        throw InvalidState("PureState: empty amplitude vector");
    }
    const double dev = std::abs(amplitudes_.norm() - 1.0);
    if (dev > tol::norm) {
        throw InvalidState(describe("PureState: amplitudes are not unit norm", dev));
    }
}

PureState PureState::basis(Index dim, Index k) {
    if (k < 0 || k >= dim) {
        throw DimensionMismatch("PureState::basis: index out of range");
    }
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v));
}

// ------------------------------------------------------------ DensityMatrix

DensityMatrix::DensityMatrix(Matrix m, Check check) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw InvalidState("DensityMatrix: matrix must be square and non-empty");
    }
    const double herm = max_abs(m - m.adjoint());
    if (herm > tol::hermitian) {
        throw InvalidState(describe("DensityMatrix: not Hermitian", herm));
    }
    const double tr = std::abs(m.trace() - Complex(1.0, 0.0));
    if (tr > tol::trace) {
        throw InvalidState(describe("DensityMatrix: trace is not 1", tr));
    }
    m_ = (m + m.adjoint()) / 2.0;
    if (check == Check::full) {
        const double lowest = hermitian_eigenvalues(m_).minCoeff();
        if (lowest < -tol::psd) {
            throw InvalidState(describe("DensityMatrix: negative eigenvalue", lowest));
        }
    }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
    const Vector& v = psi.amplitudes();
    return DensityMatrix(v * v.adjoint(), Check::structural);
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
    return DensityMatrix(identity(dim) / static_cast<double>(dim), Check::structural);
}

Eigen::VectorXd DensityMatrix::spectrum() const {
    return hermitian_eigenvalues(m_).cwiseMax(0.0);
}

// ---------------------------------------------------------- ProjectorFamily

ProjectorFamily ProjectorFamily::from_projectors(std::vector<Matrix> members, std::vector<double> labels) {
    if (members.empty()) {
        throw InvalidState("ProjectorFamily: no members");
    }
    const Index dim = members.front().rows();
    if (labels.empty()) {
        labels.resize(members.size());
        std::iota(labels.begin(), labels.end(), 0.0);
    }
    if (labels.size() != members.size()) {
        throw InvalidState("ProjectorFamily: label count differs from member count");
    }
    Matrix sum = Matrix::Zero(dim, dim);
    for (std::size_t a = 0; a < members.size(); ++a) {
        const Matrix& p = members[a];
        if (p.rows() != dim || p.cols() != dim) {
            throw DimensionMismatch("ProjectorFamily: members differ in dimension");
        }
        if (max_abs(p - p.adjoint()) > tol::projector) {
            throw InvalidState("ProjectorFamily: member is not Hermitian");
        }
        if (max_abs(p * p - p) > tol::projector) {
            throw InvalidState("ProjectorFamily: member is not idempotent");
        }
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            if (max_abs(p * members[b]) > tol::projector) {
                throw InvalidState("ProjectorFamily: members are not mutually orthogonal");
            }
        }
        sum += p;
    }
    if (max_abs(sum - identity(dim)) > tol::projector) {
        throw InvalidState("ProjectorFamily: members do not sum to the identity");
    }
    ProjectorFamily f;
    f.dim_ = dim;
    f.labels_ = std::move(labels);
    f.dense_ = std::move(members);
    return f;
}

ProjectorFamily ProjectorFamily::from_cells(std::vector<int> cell_of_basis, std::vector<double> labels) {
    if (cell_of_basis.empty() || labels.empty()) {
        throw InvalidState("ProjectorFamily: empty cell assignment");
    }
    std::vector<bool> used(labels.size(), false);
    for (const int c : cell_of_basis) {
        if (c < 0 || static_cast<std::size_t>(c) >= labels.size()) {
            throw InvalidState("ProjectorFamily: cell index out of range");
        }
        used[static_cast<std::size_t>(c)] = true;
    }
    if (std::find(used.begin(), used.end(), false) != used.end()) {
        throw InvalidState("ProjectorFamily: a member projects onto the zero subspace");
    }
    ProjectorFamily f;
    f.dim_ = static_cast<Index>(cell_of_basis.size());
    f.labels_ = std::move(labels);
    f.cells_ = std::move(cell_of_basis);
    return f;
}

ProjectorFamily ProjectorFamily::trivial(Index dim) {
    return from_cells(std::vector<int>(static_cast<std::size_t>(dim), 0), {0.0});
}

ProjectorFamily ProjectorFamily::computational(Index dim) {
    std::vector<int> cells(static_cast<std::size_t>(dim));
    std::iota(cells.begin(), cells.end(), 0);
    std::vector<double> labels(cells.begin(), cells.end());
    return from_cells(std::move(cells), std::move(labels));
}

Matrix ProjectorFamily::member(std::size_t alpha) const {
    if (alpha >= size()) {
        throw DimensionMismatch("ProjectorFamily::member: index out of range");
    }
    if (!is_diagonal()) {
        return dense_[alpha];
    }
    Matrix p = Matrix::Zero(dim_, dim_);
    for (Index i = 0; i < dim_; ++i) {
        if (cells_[static_cast<std::size_t>(i)] == static_cast<int>(alpha)) {
            p(i, i) = 1.0;
        }
    }
    return p;
}

ProjectorFamily ProjectorFamily::lift_left(Index left_dim) const {
    ProjectorFamily f;
    f.dim_ = dim_ * left_dim;
    f.labels_ = labels_;
    if (is_diagonal()) {
        f.cells_.reserve(static_cast<std::size_t>(f.dim_));
        for (Index l = 0; l < left_dim; ++l) {
            f.cells_.insert(f.cells_.end(), cells_.begin(), cells_.end());
        }
    } else {
        for (const Matrix& p : dense_) {
            f.dense_.push_back(tensor(identity(left_dim), p));
        }
    }
    return f;
}

// --------------------------------------------------------------- UnitaryMap

UnitaryMap::UnitaryMap(Matrix u) : u_(std::move(u)) {
    if (u_.rows() == 0 || u_.rows() != u_.cols()) {
        throw InvalidState("UnitaryMap: matrix must be square and non-empty");
    }
    const double dev = max_abs(u_.adjoint() * u_ - qboltz::identity(u_.rows()));
    if (dev > tol::unitary) {
        throw InvalidState(describe("UnitaryMap: not unitary", dev));
    }
}

UnitaryMap UnitaryMap::identity(Index dim) {
    return UnitaryMap(qboltz::identity(dim), Trusted{});
}

UnitaryMap UnitaryMap::exp_i(const Matrix& generator, double t) {
    if (!is_hermitian(generator)) {
        throw InvalidState("UnitaryMap::exp_i: generator is not Hermitian");
    }
    const Matrix h = (generator + generator.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    Vector phases(ev.size());
    for (Index k = 0; k < ev.size(); ++k) {
        phases(k) = std::exp(Complex(0.0, t * ev(k)));
    }
    const Matrix& v = solver.eigenvectors();
    return UnitaryMap(v * phases.asDiagonal() * v.adjoint(), Trusted{});
}

DensityMatrix UnitaryMap::apply(const DensityMatrix& rho) const {
    require_same_dim(dim(), rho.dim(), "UnitaryMap::apply");
    return DensityMatrix(u_ * rho.matrix() * u_.adjoint(), DensityMatrix::Check::structural);
}

PureState UnitaryMap::apply(const PureState& psi) const {
    require_same_dim(dim(), psi.dim(), "UnitaryMap::apply");
    Vector v = u_ * psi.amplitudes();
    v.normalize();
    return PureState(std::move(v));
}

UnitaryMap operator*(const UnitaryMap& a, const UnitaryMap& b) {
    require_same_dim(a.dim(), b.dim(), "UnitaryMap::operator*");
    return UnitaryMap(a.u_ * b.u_, UnitaryMap::Trusted{});
}

// ----------------------------------------------------------------- KrausMap

KrausMap::KrausMap(std::vector<Matrix> operators) : ops_(std::move(operators)) {
    if (ops_.empty()) {
        throw InvalidState("KrausMap: no operators");
    }
    const Index rows = ops_.front().rows();
    const Index cols = ops_.front().cols();
    Matrix sum = Matrix::Zero(cols, cols);
    for (const Matrix& k : ops_) {
        if (k.rows() != rows || k.cols() != cols) {
            throw DimensionMismatch("KrausMap: operators differ in shape");
        }
        sum += k.adjoint() * k;
    }
    const double dev = max_abs(sum - identity(cols));
    if (dev > tol::unitary) {
        throw InvalidState(describe("KrausMap: not trace preserving", dev));
    }
}

DensityMatrix KrausMap::apply(const DensityMatrix& rho) const {
    require_same_dim(dim_in(), rho.dim(), "KrausMap::apply");
    Matrix out = Matrix::Zero(dim_out(), dim_out());
    for (const Matrix& k : ops_) {
        out += k * rho.matrix() * k.adjoint();
    }
    return DensityMatrix(std::move(out), DensityMatrix::Check::structural);
}

// ------------------------------------------------------------------ tensors

Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Vector tensor(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(tensor(a.matrix(), b.matrix()), DensityMatrix::Check::structural);
}

PureState tensor(const PureState& a, const PureState& b) {
    return PureState(tensor(a.amplitudes(), b.amplitudes()));
}

Matrix embed_site(const Matrix& op, std::size_t site, std::span<const Index> factor_dims) {
    if (site >= factor_dims.size() || op.rows() != factor_dims[site] || op.cols() != factor_dims[site]) {
        throw DimensionMismatch("embed_site: operator does not fit the requested factor");
    }
    Matrix out = Matrix::Ones(1, 1);
    for (std::size_t f = 0; f < factor_dims.size(); ++f) {
        out = tensor(out, f == site ? op : identity(factor_dims[f]));
    }
    return out;
}

// --------------------------------------------------------- pinching & co.

DensityMatrix pinch(const DensityMatrix& rho, const ProjectorFamily& family) {
    require_same_dim(rho.dim(), family.dim(), "pinch");
    const Matrix& m = rho.matrix();
    if (family.is_diagonal()) {
        const auto& cells = family.cells();
        Matrix out = m;
        for (Index j = 0; j < m.cols(); ++j) {
            for (Index i = 0; i < m.rows(); ++i) {
                if (cells[static_cast<std::size_t>(i)] != cells[static_cast<std::size_t>(j)]) {
                    out(i, j) = 0.0;
                }
            }
        }
        return DensityMatrix(std::move(out), DensityMatrix::Check::structural);
    }
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (std::size_t a = 0; a < family.size(); ++a) {
        const Matrix p = family.member(a);
        out += p * m * p;
    }
    return DensityMatrix(std::move(out), DensityMatrix::Check::structural);
}

std::vector<double> branch_weights(const DensityMatrix& rho, const ProjectorFamily& family) {
    require_same_dim(rho.dim(), family.dim(), "branch_weights");
    std::vector<double> w(family.size(), 0.0);
    if (family.is_diagonal()) {
        const auto& cells = family.cells();
        for (Index i = 0; i < rho.dim(); ++i) {
            w[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)])] += rho.matrix()(i, i).real();
        }
    } else {
        for (std::size_t a = 0; a < family.size(); ++a) {
            w[a] = trace_of_product(rho.matrix(), family.member(a)).real();
        }
    }
    for (double& x : w) {
        x = std::max(x, 0.0);
    }
    return w;
}

ConditionalState conditional_state(const DensityMatrix& rho, std::size_t alpha, const ProjectorFamily& family) {
    require_same_dim(rho.dim(), family.dim(), "conditional_state");
    if (alpha >= family.size()) {
        throw DimensionMismatch("conditional_state: branch index out of range");
    }
    const Matrix p = family.member(alpha);
    Matrix branch = p * rho.matrix() * p;
    const double w = branch.trace().real();
    if (w <= tol::zero_weight) {
        std::ostringstream os;
        os << "conditional_state: branch " << alpha << " has weight " << w;
        throw ZeroWeight(os.str());
    }
    branch /= w;
    return {DensityMatrix(std::move(branch), DensityMatrix::Check::structural), w};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const Index> factor_dims,
                            std::span<const std::size_t> keep) {
    require_same_dim(product(factor_dims), rho.dim(), "partial_trace");
    const std::size_t nf = factor_dims.size();
    std::vector<bool> kept(nf, false);
    for (const std::size_t k : keep) {
        if (k >= nf) {
            throw DimensionMismatch("partial_trace: kept factor out of range");
        }
        kept[k] = true;
    }
    Index dk = 1;
    Index dt = 1;
    for (std::size_t f = 0; f < nf; ++f) {
        (kept[f] ? dk : dt) *= factor_dims[f];
    }
    // Full index of (kept multi-index, traced multi-index), both row-major in
    // the original factor order.
    std::vector<Index> full(static_cast<std::size_t>(dk * dt));
    for (Index i = 0; i < dk * dt; ++i) {
        Index rem = i;
        Index ki = 0;
        Index ti = 0;
        Index kstride = 1;
        Index tstride = 1;
        for (std::size_t f = nf; f-- > 0;) {
            const Index digit = rem % factor_dims[f];
            rem /= factor_dims[f];
            if (kept[f]) {
                ki += digit * kstride;
                kstride *= factor_dims[f];
            } else {
                ti += digit * tstride;
                tstride *= factor_dims[f];
            }
        }
        full[static_cast<std::size_t>(ki * dt + ti)] = i;
    }
    const Matrix& m = rho.matrix();
    Matrix out = Matrix::Zero(dk, dk);
    for (Index a = 0; a < dk; ++a) {
        for (Index b = 0; b < dk; ++b) {
            Complex s = 0.0;
            for (Index t = 0; t < dt; ++t) {
                s += m(full[static_cast<std::size_t>(a * dt + t)], full[static_cast<std::size_t>(b * dt + t)]);
            }
            out(a, b) = s;
        }
    }
    return DensityMatrix(std::move(out), DensityMatrix::Check::structural);
}

double trace_norm_pure_diff(const PureState& psi1, const PureState& psi2) {
    require_same_dim(psi1.dim(), psi2.dim(), "trace_norm_pure_diff");
    const double overlap = std::norm(psi1.amplitudes().dot(psi2.amplitudes()));
    return 2.0 * std::sqrt(std::max(0.0, 1.0 - overlap));
}

double commutator_defect(const DensityMatrix& rho, const ProjectorFamily& family) {
    require_same_dim(rho.dim(), family.dim(), "commutator_defect");
    const Matrix& m = rho.matrix();
    if (family.is_diagonal()) {
        // [P_alpha, rho]_ij = (p_i - p_j) rho_ij, so every alpha sees exactly the
        // entries that straddle two cells.
        const auto& cells = family.cells();
        double worst = 0.0;
        for (Index j = 0; j < m.cols(); ++j) {
            for (Index i = 0; i < m.rows(); ++i) {
                if (cells[static_cast<std::size_t>(i)] != cells[static_cast<std::size_t>(j)]) {
                    worst = std::max(worst, std::abs(m(i, j)));
                }
            }
        }
        return worst;
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < family.size(); ++a) {
        const Matrix p = family.member(a);
        worst = std::max(worst, max_abs(p * m - m * p));
    }
    return worst;
}

bool is_decoherent(const DensityMatrix& rho, const ProjectorFamily& family, double tolerance) {
    return commutator_defect(rho, family) <= tolerance;
}

double mean_observable(const DensityMatrix& rho, std::span<const Matrix> site_operators) {
    if (site_operators.empty()) {
        throw DimensionMismatch("mean_observable: no site operators");
    }
    double sum = 0.0;
    for (const Matrix& op : site_operators) {
        require_same_dim(op.rows(), rho.dim(), "mean_observable");
        sum += trace_of_product(rho.matrix(), op).real();
    }
    return sum / static_cast<double>(site_operators.size());
}

}  // namespace qboltz
