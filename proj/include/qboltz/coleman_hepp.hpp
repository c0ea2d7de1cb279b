#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qboltz/qstate.hpp"

namespace qboltz::coleman_hepp {

// Layout of the full space: system qubit first (slow index), then chain sites
// 1..N. Basis index 0 is spin up everywhere. Time is the position of the flip
// front: after t steps the first t chain sites of the system-down branch have
// been flipped.

inline constexpr int default_dense_cap = 5;  ///< largest L the dense paths accept
inline constexpr int max_enumerated_sites = 21;  ///< bound on 2^N branch lists

struct Params {
    int L = 1;
    Complex c_plus{1.0 / std::numbers::sqrt2, 0.0};
    Complex c_minus{1.0 / std::numbers::sqrt2, 0.0};
    /// beta * B; +infinity selects the fully polarized chain.
    double beta_B = std::numeric_limits<double>::infinity();
    /// +1 for the chain polarized up, -1 for down.
    int sign = 1;

    int sites() const { return 2 * L + 1; }
    bool zero_temperature() const { return beta_B == std::numeric_limits<double>::infinity(); }
    /// Probability that a chain site is up in the initial state.
    double up_probability() const;
    /// Throws InvalidState on a violated invariant.
    void validate() const;
};

struct Branch {
    std::uint64_t config = 0;  ///< bit (N - k) set means site k is up
    double weight = 0.0;
    Complex amp_plus;
    Complex amp_minus;
};

/// Branch form of the state: every branch is
/// amp_plus |+> (x) |I> + amp_minus |-> (x) |flip_t(I)>.
class StructuredChainState {
public:
    StructuredChainState(int sites, int time_step, std::vector<Branch> branches);

    int sites() const { return sites_; }
    int time_step() const { return t_; }
    const std::vector<Branch>& branches() const { return branches_; }

    /// Configuration carried by the system-down component of a branch.
    std::uint64_t minus_config(const Branch& b) const;

private:
    int sites_;
    int t_;
    std::vector<Branch> branches_;
};

/// "1" for up, "0" for down, site 1 first.
std::string config_string(std::uint64_t config, int sites);

/// Chain basis index of a configuration (down spins are 1 bits, site 1 most significant).
Index chain_index(std::uint64_t config, int sites);

StructuredChainState initial_state(const Params& p);

/// Advances the flip front by one site. The system-down amplitude picks up a
/// factor -i. Throws StepPastEnd at t = N.
StructuredChainState step(const StructuredChainState& s);

/// Dense density matrix of the branch state. Throws DimensionCap when
/// L > dense_cap.
DensityMatrix density_matrix(const StructuredChainState& s, int dense_cap = default_dense_cap);

/// {Pi_+, Pi_-} by the sign of the chain polarization, on the full space
/// (identity on the system qubit). Member 0 is Pi_+ with label +1.
ProjectorFamily phase_cells(int L);
/// The same cells on the chain alone.
ProjectorFamily chain_phase_cells(int L);

struct CurvePoint {
    int t = 0;
    double s_vn = 0.0;     ///< S(rho(t)), constant in t
    double s_qb = 0.0;     ///< S_QB(rho(t)) with the phase cells
    double witness = 0.0;  ///< equality_witness(rho(t), phase cells)
};

/// Exact curve for t = 0..N from binomial sums over (ups among the first t
/// sites, ups among the rest); never forms a matrix.
std::vector<CurvePoint> qb_entropy_curve(const Params& p);

/// S_QB(N) - S_QB(0). Throws DegenerateAmplitudes when c_plus c_minus = 0.
double entropy_jump(const Params& p);

/// S(|c+|^2 Omega_+ + |c-|^2 Omega_-) on the chain alone, i.e. the final
/// entropy without the system label.
double chain_mixture_entropy(const Params& p);

struct CrossTermMass {
    double m_plus = 0.0;   ///< Tr(Pi_- Omega_+)
    double m_minus = 0.0;  ///< Tr(Pi_+ Omega_-)
};

CrossTermMass cross_term_mass(const Params& p);

/// Least-squares slope of log m_plus against N = 2L+1 over L in [l_from, l_to].
double cross_term_log_slope(double beta_B, int l_from, int l_to);

/// t0 = M + 1 - w + r in lattice units.
double decoherence_time(int M, double w, double r);

/// Tr(A P_- rho(t) P_+) for A acting on the system and the first M chain
/// sites (A is 2^(M+1) square). Vanishes identically once t > M.
Complex offdiag_overlap(const Params& p, int t, const Matrix& a, int dense_cap = default_dense_cap);

/// sigma1 on the system and on every chain site: the operator that undoes the
/// measurement. Acts on the full 2^(N+1) space.
Matrix flip_string(int L);

/// Reference engine: dense rho(t) on the full space, evolved by the two-site
/// gate exp(-i pi/2 P_-^(0) sigma1^(n)) at step n.
class DenseEngine {
public:
    explicit DenseEngine(const Params& p, int dense_cap = default_dense_cap);

    int sites() const { return sites_; }
    int time_step() const { return t_; }
    const DensityMatrix& state() const { return rho_; }

    void step();

    /// Full-space step unitary for site n (1-based), built from its generator.
    static UnitaryMap step_unitary(int L, int n);

private:
    int sites_;
    int t_ = 0;
    DensityMatrix rho_;
};

/// Curve recomputed with the dense engine: S_QB by pinching the dense matrix.
std::vector<CurvePoint> dense_qb_entropy_curve(const Params& p, int dense_cap = default_dense_cap);

}  // namespace qboltz::coleman_hepp
