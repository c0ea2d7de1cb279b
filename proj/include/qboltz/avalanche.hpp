#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qboltz/qstate.hpp"

namespace qboltz::avalanche {

// Apparatus register of n spins, site 1 first (slowest). As everywhere in the
// library, basis index bit 1 means spin down. A configuration is stored as its
// basis index.

inline constexpr int max_orbit_sites = 12;
inline constexpr int max_trace_sites = 10;

struct Params {
    int n = 4;
    /// One-line notation, 1-based: the spin at site j moves to site permutation[j-1].
    std::vector<int> permutation{2, 3, 4, 1};
    int steps = 12;
    Complex c_plus{1.0 / std::numbers::sqrt2, 0.0};
    Complex c_minus{1.0 / std::numbers::sqrt2, 0.0};
    /// Largest orbit orbit_analysis will follow; 0 means 2^n.
    std::uint64_t orbit_cap = 0;
    /// Starting configuration of the system-down branch as "+"/"-" per site;
    /// empty means seed_config(n).
    std::string start;

    /// Throws InvalidState on a violated invariant.
    void validate() const;
    std::uint64_t start_config() const;
};

/// "2341" (one digit per site, n <= 9) or "2,3,4,1".
std::vector<int> parse_permutation(const std::string& text);
std::string format_permutation(const std::vector<int>& permutation);
/// One-line form of the single cycle (c1 c2 ... ck) on n sites: c1 -> c2 ->
/// ... -> ck -> c1, every other site fixed. Throws InvalidState.
std::vector<int> cycle_to_one_line(const std::vector<int>& cycle, int n);

/// Seed of the system-down branch: site 1 down, all others up.
std::uint64_t seed_config(int n);

/// S_z = (ups - downs) / 2 of a configuration, times 2 (an integer).
int twice_spin(std::uint64_t config, int n);

/// "+-++"-style rendering, site 1 first.
std::string config_string(std::uint64_t config, int n);

/// Pair map on sites (2k-1, 2k): fixes |++> and |+->, swaps |-+> and |-->.
/// Embedded by the identity on the other sites; dense, for small n.
UnitaryMap pair_unitary(int n, int k);

/// Image of one basis configuration under a full step (pairs, then sites).
std::uint64_t step_config(std::uint64_t config, const Params& p);

/// One step on a 2^n apparatus state. Throws DimensionMismatch.
PureState avalanche_step(const PureState& state, const Params& p);

struct OrbitReport {
    std::vector<std::uint64_t> orbit;            ///< visited configurations, seed first
    std::size_t orbit_dim = 0;                   ///< rank of the orbit span
    std::map<int, std::size_t> sector_dims;      ///< rank of P(m) orbit, keyed by S_z
    int magnetization_numerator = 0;             ///< sum over the orbit of 2 S_z
    double mean_magnetization = 0.0;             ///< average S_z over one period
    std::vector<double> entropy_curve;           ///< S_QB at steps 0..orbit length
};

/// Follows the starting configuration until it returns. Throws OrbitCap when the orbit is longer
/// than the configured bound and DimensionCap for n > max_orbit_sites.
OrbitReport orbit_analysis(const Params& p);

/// Diagonal two-cell family on the apparatus: member 0 is S_z > 0 (label +1),
/// member 1 is S_z <= 0 (label -1).
ProjectorFamily sign_cells(int n);

struct TracePoint {
    int step = 0;
    double s_qb = 0.0;
    double s_vn = 0.0;  ///< entropy of the reduced apparatus state
};

/// Evolves c+ |+>|all up> + c- |->|start> on the 2^(n+1) space and records
/// S_QB with sign_cells lifted to the full space. Throws DimensionCap for
/// n > max_trace_sites.
std::vector<TracePoint> entropy_trace(const Params& p);

}  // namespace qboltz::avalanche
