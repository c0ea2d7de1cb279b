#pragma once

#include <cstdint>
#include <string_view>

#include "qboltz/qstate.hpp"

namespace qboltz::suites {

// Randomized checks of the entropy results. Trial i of a run draws all its
// randomness from random::stream(seed, i), so any trial can be replayed alone.

struct SecondLawTrial {
    Index dim = 0;
    std::size_t cells = 0;
    double s_qb_initial = 0.0;
    double s_qb_final = 0.0;
    double gap = 0.0;
    double witness = 0.0;  ///< equality_witness of the evolved state
};

/// Decoherent rho0 = pinch(random rho, P), Haar U, random P. The dimension
/// cycles through 4, 8, 16 with the trial index.
SecondLawTrial second_law_trial(std::uint64_t seed, std::uint64_t index);

enum class Lemma {
    nonnegativity,    ///< S(r1|r2) >= 0
    identity,         ///< S(r|r) = 0 and S(r1|r2) > 0 for r1 != r2
    domination,       ///< l r1 <= r2 implies S(r1|r2) <= -log l
    joint_convexity,  ///< S(sum l_i r_i | sum l_i s_i) <= sum l_i S(r_i|s_i) on a l-grid
    monotonicity,     ///< non-increasing under pinching, partial trace and a Kraus map
};

inline constexpr Lemma all_lemmas[] = {Lemma::nonnegativity, Lemma::identity, Lemma::domination,
                                       Lemma::joint_convexity, Lemma::monotonicity};

std::string_view lemma_name(Lemma lemma);

/// Slack allowed on every relative-entropy inequality.
inline constexpr double lemma_tolerance = 1e-9;

/// Smallest slack of the trial's inequalities; negative means a violation
/// beyond lemma_tolerance.
double lemma_trial(Lemma lemma, std::uint64_t seed, std::uint64_t index);

}  // namespace qboltz::suites
