#pragma once

#include <cstdint>
#include <random>

#include "qboltz/qstate.hpp"

namespace qboltz::random {

using Engine = std::mt19937_64;

/// Independent stream for item `index` of a run seeded with `seed`, so results
/// do not depend on how work is split across threads.
Engine stream(std::uint64_t seed, std::uint64_t index);

Matrix ginibre(Index rows, Index cols, Engine& rng);

PureState pure_state(Index dim, Engine& rng);

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
UnitaryMap unitary(Index dim, Engine& rng);

/// G G^dagger / Tr for a dim x rank Ginibre G; rank = 0 means full rank.
DensityMatrix density_matrix(Index dim, Engine& rng, Index rank = 0);

/// Splits a Haar-random orthonormal basis into `cells` non-empty groups and
/// returns the corresponding dense projectors.
ProjectorFamily projector_family(Index dim, std::size_t cells, Engine& rng);

/// `count` Kraus operators dim_out x dim_in obtained by slicing a random
/// isometry C^dim_in -> C^(count * dim_out).
KrausMap kraus_map(Index dim_in, Index dim_out, std::size_t count, Engine& rng);

}  // namespace qboltz::random
