#include "qboltz/random.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/QR>

namespace qboltz::random {

Engine stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Engine(seq);
}

Matrix ginibre(Index rows, Index cols, Engine& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = Complex(re, im);
        }
    }
    return g;
}

namespace {

// Orthonormal columns from a Ginibre matrix, with R's diagonal phases
// absorbed so the result is Haar distributed.
Matrix haar_isometry(Index rows, Index cols, Engine& rng) {
    const Matrix g = ginibre(rows, cols, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    const Matrix r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    for (Index k = 0; k < cols; ++k) {
        const double mag = std::abs(r(k, k));
        if (mag > 0.0) {
            q.col(k) *= r(k, k) / mag;
        }
    }
    return q;
}

}  // namespace

PureState pure_state(Index dim, Engine& rng) {
    Vector v = ginibre(dim, 1, rng).col(0);
    v.normalize();
    return PureState(std::move(v));
}

UnitaryMap unitary(Index dim, Engine& rng) {
    return UnitaryMap(haar_isometry(dim, dim, rng));
}

DensityMatrix density_matrix(Index dim, Engine& rng, Index rank) {
    const Matrix g = ginibre(dim, rank == 0 ? dim : rank, rng);
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix(std::move(m));
}

ProjectorFamily projector_family(Index dim, std::size_t cells, Engine& rng) {
    if (cells == 0 || static_cast<Index>(cells) > dim) {
        throw DimensionMismatch("random::projector_family: need 1 <= cells <= dim");
    }
    const Matrix basis = haar_isometry(dim, dim, rng);
    // Every cell gets one basis vector, the rest are dealt out at random.
    std::vector<std::size_t> owner(static_cast<std::size_t>(dim));
    std::iota(owner.begin(), owner.begin() + static_cast<std::ptrdiff_t>(cells), std::size_t{0});
    std::uniform_int_distribution<std::size_t> pick(0, cells - 1);
    for (std::size_t k = cells; k < owner.size(); ++k) {
        owner[k] = pick(rng);
    }
    std::shuffle(owner.begin(), owner.end(), rng);

    std::vector<Matrix> members(cells, Matrix::Zero(dim, dim));
    for (Index k = 0; k < dim; ++k) {
        members[owner[static_cast<std::size_t>(k)]] += basis.col(k) * basis.col(k).adjoint();
    }
    return ProjectorFamily::from_projectors(std::move(members));
}

KrausMap kraus_map(Index dim_in, Index dim_out, std::size_t count, Engine& rng) {
    const Index rows = dim_out * static_cast<Index>(count);
    if (rows < dim_in) {
        throw DimensionMismatch("random::kraus_map: count * dim_out must be >= dim_in");
    }
    const Matrix v = haar_isometry(rows, dim_in, rng);
    std::vector<Matrix> ops;
    ops.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        ops.emplace_back(v.middleRows(static_cast<Index>(k) * dim_out, dim_out));
    }
    return KrausMap(std::move(ops));
}

}  // namespace qboltz::random
