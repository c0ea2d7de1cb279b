#include <array>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qboltz/entropy.hpp"
#include "qboltz/random.hpp"

using namespace qboltz;

namespace {

DensityMatrix diag(std::initializer_list<double> xs) {
    Matrix m = Matrix::Zero(static_cast<Index>(xs.size()), static_cast<Index>(xs.size()));
    Index i = 0;
    for (const double x : xs) {
        m(i, i) = x;
        ++i;
    }
    return DensityMatrix(m);
}

DensityMatrix plus_state() {
    Matrix m = Matrix::Constant(2, 2, 0.5);
    return DensityMatrix(m);
}

}  // namespace

TEST(VonNeumann, Examples) {
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::from_pure(PureState::basis(3, 1))), 0.0, 1e-15);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(2)), std::log(2.0), 1e-15);
    const double expected = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
    EXPECT_NEAR(von_neumann_entropy(diag({0.25, 0.75})), expected, 1e-15);
    EXPECT_NEAR(expected, 0.562335, 1e-6);
}

TEST(VonNeumann, MatchesGeneralEigensolver) {
    random::Engine rng = random::stream(20, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho = random::density_matrix(6, rng);
        EXPECT_NEAR(von_neumann_entropy(rho), oracle::entropy_general_solver(rho.matrix()), 1e-10);
    }
}

TEST(RelativeEntropy, Examples) {
    random::Engine rng = random::stream(21, 0);
    const DensityMatrix rho = random::density_matrix(4, rng);
    EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-12);
    EXPECT_NEAR(relative_entropy(diag({1.0, 0.0}), diag({0.5, 0.5})), std::log(2.0), 1e-15);
    EXPECT_EQ(relative_entropy(diag({0.5, 0.5}), diag({1.0, 0.0})), std::numeric_limits<double>::infinity());
}

TEST(RelativeEntropy, CommutingCaseIsClassical) {
    const double p[] = {0.1, 0.2, 0.7};
    const double q[] = {0.3, 0.3, 0.4};
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
        expected += p[i] * std::log(p[i] / q[i]);
    }
    EXPECT_NEAR(relative_entropy(diag({0.1, 0.2, 0.7}), diag({0.3, 0.3, 0.4})), expected, 1e-14);
}

TEST(RelativeEntropy, NonnegativeAndMonotone) {
    random::Engine rng = random::stream(22, 0);
    const std::array<Index, 2> dims{2, 3};
    const std::array<std::size_t, 1> keep{1};
    for (int trial = 0; trial < 50; ++trial) {
        const DensityMatrix a = random::density_matrix(6, rng);
        const DensityMatrix b = random::density_matrix(6, rng);
        const double s = relative_entropy(a, b);
        EXPECT_GE(s, -1e-9);
        const ProjectorFamily fam = random::projector_family(6, 3, rng);
        EXPECT_LE(relative_entropy(pinch(a, fam), pinch(b, fam)), s + 1e-9);
        EXPECT_LE(relative_entropy(partial_trace(a, dims, keep), partial_trace(b, dims, keep)), s + 1e-9);
        const KrausMap k = random::kraus_map(6, 4, 3, rng);
        EXPECT_LE(relative_entropy(k.apply(a), k.apply(b)), s + 1e-9);
    }
}

TEST(QuantumBoltzmann, Examples) {
    random::Engine rng = random::stream(23, 0);
    const ProjectorFamily fam = random::projector_family(4, 2, rng);
    const DensityMatrix decoherent = pinch(random::density_matrix(4, rng), fam);
    EXPECT_NEAR(quantum_boltzmann_entropy(decoherent, fam), von_neumann_entropy(decoherent), 1e-12);

    const DensityMatrix rho = random::density_matrix(4, rng);
    EXPECT_NEAR(quantum_boltzmann_entropy(rho, ProjectorFamily::trivial(4)), von_neumann_entropy(rho), 1e-12);
}

TEST(QuantumBoltzmann, TwoCellSuperposition) {
    // c+ |+++> + c- |--->, cells by sign of the total polarization.
    const double wp = 0.3;
    Vector v = Vector::Zero(8);
    v(0) = std::sqrt(wp);
    v(7) = Complex(0.0, std::sqrt(1.0 - wp));
    const PureState psi(v);
    std::vector<int> cells(8);
    for (int i = 0; i < 8; ++i) {
        cells[static_cast<std::size_t>(i)] = 2 * __builtin_popcount(static_cast<unsigned>(i)) > 3 ? 1 : 0;
    }
    const ProjectorFamily fam = ProjectorFamily::from_cells(cells, {1.0, -1.0});
    const double expected = -wp * std::log(wp) - (1 - wp) * std::log(1 - wp);
    EXPECT_NEAR(quantum_boltzmann_entropy(DensityMatrix::from_pure(psi), fam), expected, 1e-12);
    EXPECT_NEAR(quantum_boltzmann_entropy(psi, fam), expected, 1e-12);
}

TEST(QuantumBoltzmann, PureOverloadMatchesDense) {
    random::Engine rng = random::stream(24, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const PureState psi = random::pure_state(8, rng);
        const ProjectorFamily fam = random::projector_family(8, 3, rng);
        EXPECT_NEAR(quantum_boltzmann_entropy(psi, fam), quantum_boltzmann_entropy(DensityMatrix::from_pure(psi), fam),
                    1e-10);
    }
}

TEST(QuantumBoltzmann, DiagonalBlocksMatchDense) {
    random::Engine rng = random::stream(25, 0);
    const DensityMatrix rho = random::density_matrix(8, rng);
    const ProjectorFamily d = ProjectorFamily::from_cells({0, 1, 1, 0, 2, 2, 0, 1}, {0, 1, 2});
    const ProjectorFamily f = ProjectorFamily::from_projectors({d.member(0), d.member(1), d.member(2)});
    EXPECT_NEAR(quantum_boltzmann_entropy(rho, d), quantum_boltzmann_entropy(rho, f), 1e-12);
    EXPECT_NEAR(collapse_average_entropy(rho, d), collapse_average_entropy(rho, f), 1e-12);
}

TEST(CollapseAverage, Examples) {
    EXPECT_NEAR(collapse_average_entropy(diag({0.2, 0.3, 0.5}), ProjectorFamily::computational(3)), 0.0, 1e-15);
    const ProjectorFamily halves = ProjectorFamily::from_cells({0, 0, 1, 1}, {0, 1});
    EXPECT_NEAR(collapse_average_entropy(DensityMatrix::maximally_mixed(4), halves), std::log(2.0), 1e-14);
}

TEST(CollapseAverage, GapIsShannonOfWeights) {
    random::Engine rng = random::stream(26, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const DensityMatrix rho = random::density_matrix(6, rng);
        const ProjectorFamily fam = random::projector_family(6, 2, rng);
        const double avg = collapse_average_entropy(rho, fam);
        const double sqb = quantum_boltzmann_entropy(rho, fam);
        const auto w = branch_weights(rho, fam);
        EXPECT_LE(avg, sqb + 1e-10);
        EXPECT_NEAR(sqb - avg, shannon_entropy(w), 1e-10);
        if (w[0] > 0.01 && w[0] < 0.99) {
            EXPECT_GT(sqb - avg, 1e-6);
        }
    }
}

TEST(SecondLaw, TrivialCases) {
    random::Engine rng = random::stream(27, 0);
    const ProjectorFamily fam = random::projector_family(4, 2, rng);
    const DensityMatrix rho0 = pinch(random::density_matrix(4, rng), fam);
    EXPECT_NEAR(second_law_gap(rho0, UnitaryMap::identity(4), fam).gap, 0.0, 1e-12);
    const UnitaryMap u = random::unitary(4, rng);
    EXPECT_NEAR(second_law_gap(rho0, u, ProjectorFamily::trivial(4)).gap, 0.0, 1e-12);
}

TEST(SecondLaw, RejectsCoherentInitialState) {
    EXPECT_THROW(second_law_gap(plus_state(), UnitaryMap::identity(2), ProjectorFamily::computational(2)),
                 NotDecoherentInitialState);
}

TEST(SecondLaw, RandomInstances) {
    random::Engine rng = random::stream(28, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const ProjectorFamily fam = random::projector_family(8, 3, rng);
        const DensityMatrix rho0 = pinch(random::density_matrix(8, rng), fam);
        const EntropyReport r = second_law_gap(rho0, random::unitary(8, rng), fam);
        EXPECT_TRUE(r.decoherent_initial);
        EXPECT_NEAR(r.s_qb_initial, r.s_vn, 1e-10);
        EXPECT_GE(r.gap, -second_law_slack);
        EXPECT_GE(r.s_qb, r.s_vn - 1e-10);
    }
}

TEST(EqualityWitness, Examples) {
    EXPECT_NEAR(equality_witness(plus_state(), ProjectorFamily::computational(2)), 0.5, 1e-15);
    EXPECT_EQ(equality_witness(diag({0.4, 0.6}), ProjectorFamily::computational(2)), 0.0);
    random::Engine rng = random::stream(29, 0);
    const ProjectorFamily fam = random::projector_family(5, 2, rng);
    const DensityMatrix pinched = pinch(random::density_matrix(5, rng), fam);
    EXPECT_LT(equality_witness(pinched, fam), 1e-12);
}

TEST(EqualityWitness, ZeroWitnessMeansNoGap) {
    // A unitary that commutes with the family leaves every cell invariant.
    random::Engine rng = random::stream(30, 0);
    const ProjectorFamily fam = ProjectorFamily::from_cells({0, 0, 1, 1}, {0, 1});
    Matrix u = Matrix::Zero(4, 4);
    u.topLeftCorner(2, 2) = random::unitary(2, rng).matrix();
    u.bottomRightCorner(2, 2) = random::unitary(2, rng).matrix();
    const DensityMatrix rho0 = pinch(random::density_matrix(4, rng), fam);
    const UnitaryMap um(u);
    EXPECT_LE(equality_witness(um.apply(rho0), fam), 1e-12);
    EXPECT_LE(std::abs(second_law_gap(rho0, um, fam).gap), 1e-9);
}
