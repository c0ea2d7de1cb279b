#include "qboltz/entropy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qboltz {

namespace {

double entropy_of_spectrum(const Eigen::VectorXd& ev) {
    double s = 0.0;
    for (Index k = 0; k < ev.size(); ++k) {
        if (ev(k) > tol::eigen_clip) {
            s -= ev(k) * std::log(ev(k));
        }
    }
    return s;
}

// Basis indices of every cell of a diagonal family.
std::vector<std::vector<Index>> cell_members(const ProjectorFamily& family) {
    std::vector<std::vector<Index>> out(family.size());
    const auto& cells = family.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out[static_cast<std::size_t>(cells[i])].push_back(static_cast<Index>(i));
    }
    return out;
}

Matrix block(const Matrix& m, const std::vector<Index>& idx) {
    const auto n = static_cast<Index>(idx.size());
    Matrix b(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            b(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
    }
    return b;
}

void require_same_dim(Index a, Index b, const char* where) {
    if (a != b) {
        std::ostringstream os;
        os << where << ": dimension " << a << " does not match " << b;
        throw DimensionMismatch(os.str());
    }
}

}  // namespace

double shannon_entropy(std::span<const double> weights) {
    double s = 0.0;
    for (const double w : weights) {
        if (w > 0.0) {
            s -= w * std::log(w);
        }
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return entropy_of_spectrum(rho.spectrum());
}

double relative_entropy(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    require_same_dim(rho1.dim(), rho2.dim(), "relative_entropy");
    Eigen::SelfAdjointEigenSolver<Matrix> e1(rho1.matrix());
    Eigen::SelfAdjointEigenSolver<Matrix> e2(rho2.matrix());
    const Eigen::VectorXd lam = e1.eigenvalues().cwiseMax(0.0);
    const Eigen::VectorXd mu = e2.eigenvalues();
    // overlap(i, j) = |<u_i, v_j>|^2
    const Eigen::MatrixXd overlap = (e1.eigenvectors().adjoint() * e2.eigenvectors()).cwiseAbs2();

    double kernel_mass = 0.0;
    double cross = 0.0;
    for (Index j = 0; j < mu.size(); ++j) {
        const double weight = lam.dot(overlap.col(j));
        if (mu(j) > tol::eigen_clip) {
            cross -= weight * std::log(mu(j));
        } else {
            kernel_mass += weight;
        }
    }
    if (kernel_mass > tol::eigen_clip) {
        return std::numeric_limits<double>::infinity();
    }
    return -entropy_of_spectrum(lam) + cross;
}

double quantum_boltzmann_entropy(const DensityMatrix& rho, const ProjectorFamily& family) {
    require_same_dim(rho.dim(), family.dim(), "quantum_boltzmann_entropy");
    if (!family.is_diagonal()) {
        return von_neumann_entropy(pinch(rho, family));
    }
    double s = 0.0;
    for (const auto& idx : cell_members(family)) {
        s += entropy_of_spectrum(hermitian_eigenvalues(block(rho.matrix(), idx)).cwiseMax(0.0));
    }
    return s;
}

double quantum_boltzmann_entropy(const PureState& psi, const ProjectorFamily& family) {
    require_same_dim(psi.dim(), family.dim(), "quantum_boltzmann_entropy");
    std::vector<double> w(family.size(), 0.0);
    const Vector& v = psi.amplitudes();
    if (family.is_diagonal()) {
        const auto& cells = family.cells();
        for (Index i = 0; i < v.size(); ++i) {
            w[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)])] += std::norm(v(i));
        }
    } else {
        for (std::size_t a = 0; a < family.size(); ++a) {
            w[a] = (family.member(a) * v).squaredNorm();
        }
    }
    return shannon_entropy(w);
}

double collapse_average_entropy(const DensityMatrix& rho, const ProjectorFamily& family) {
    require_same_dim(rho.dim(), family.dim(), "collapse_average_entropy");
    double s = 0.0;
    if (family.is_diagonal()) {
        for (const auto& idx : cell_members(family)) {
            const Matrix b = block(rho.matrix(), idx);
            const double w = b.trace().real();
            if (w > tol::zero_weight) {
                s += w * entropy_of_spectrum(hermitian_eigenvalues(b / w).cwiseMax(0.0));
            }
        }
        return s;
    }
    const std::vector<double> w = branch_weights(rho, family);
    for (std::size_t a = 0; a < family.size(); ++a) {
        if (w[a] > tol::zero_weight) {
            const ConditionalState branch = conditional_state(rho, a, family);
            s += branch.weight * von_neumann_entropy(branch.state);
        }
    }
    return s;
}

EntropyReport second_law_gap(const DensityMatrix& rho0, const UnitaryMap& u, const ProjectorFamily& family) {
    require_same_dim(rho0.dim(), u.dim(), "second_law_gap");
    const double defect = commutator_defect(rho0, family);
    if (defect > second_law_precondition_tol) {
        std::ostringstream os;
        os << "second_law_gap: initial state does not commute with the family (defect " << defect << ")";
        throw NotDecoherentInitialState(os.str());
    }
    EntropyReport r;
    r.decoherent_initial = true;
    r.s_vn = von_neumann_entropy(rho0);
    r.s_qb_initial = quantum_boltzmann_entropy(rho0, family);
    r.s_qb = quantum_boltzmann_entropy(u.apply(rho0), family);
    r.gap = r.s_qb - r.s_qb_initial;
    return r;
}

double equality_witness(const DensityMatrix& rho_t, const ProjectorFamily& family) {
    require_same_dim(rho_t.dim(), family.dim(), "equality_witness");
    if (family.is_diagonal()) {
        // The off-cell part of rho is exactly the set of entries straddling two cells.
        return commutator_defect(rho_t, family);
    }
    return max_abs(rho_t.matrix() - pinch(rho_t, family).matrix());
}

}  // namespace qboltz
