#pragma once

#include <span>

#include "qboltz/qstate.hpp"

namespace qboltz {

// All entropies are in nats with Boltzmann's constant set to 1.

/// Shannon entropy -sum p log p of a weight vector (0 log 0 = 0).
double shannon_entropy(std::span<const double> weights);

/// -sum lambda log lambda over the spectrum; eigenvalues at or below
/// tol::eigen_clip contribute nothing.
double von_neumann_entropy(const DensityMatrix& rho);

/// Tr(rho1 log rho1 - rho1 log rho2). Returns +infinity when the support of
/// rho1 is not contained in the support of rho2 (eigenvalue threshold
/// tol::eigen_clip).
double relative_entropy(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// S(pinch(rho, P)). Diagonal families are evaluated block by block.
double quantum_boltzmann_entropy(const DensityMatrix& rho, const ProjectorFamily& family);

/// Pure-state shortcut: the pinched state has eigenvalues ||P_alpha psi||^2.
double quantum_boltzmann_entropy(const PureState& psi, const ProjectorFamily& family);

/// Average entropy after collapse onto the family: sum_alpha w_alpha S(rho_alpha)
/// over branches with w_alpha > tol::zero_weight.
double collapse_average_entropy(const DensityMatrix& rho, const ProjectorFamily& family);

struct EntropyReport {
    double s_vn = 0.0;          ///< S(rho0) = S(U rho0 U^dagger)
    double s_qb = 0.0;          ///< S_QB of the evolved state
    double s_qb_initial = 0.0;  ///< S_QB(rho0); equals s_vn for a decoherent rho0
    double gap = 0.0;           ///< s_qb - s_qb_initial
    bool decoherent_initial = false;
};

/// Tolerance of the decoherence precondition of second_law_gap.
inline constexpr double second_law_precondition_tol = 1e-10;
/// A gap below -second_law_slack is a violation of the entropy increase law.
inline constexpr double second_law_slack = 1e-9;

/// Entropy change S_QB(U rho0 U^dagger) - S_QB(rho0) for an initial state that
/// commutes with every member of the family. Throws NotDecoherentInitialState
/// otherwise.
EntropyReport second_law_gap(const DensityMatrix& rho0, const UnitaryMap& u, const ProjectorFamily& family);

/// ||sum_{alpha < alpha'} (P_alpha rho P_alpha' + P_alpha' rho P_alpha)||_max,
/// the coherence between cells that must vanish for S_QB to stay constant.
double equality_witness(const DensityMatrix& rho_t, const ProjectorFamily& family);

}  // namespace qboltz
