#include <array>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qboltz/coleman_hepp.hpp"
#include "qboltz/entropy.hpp"
#include "qboltz/random.hpp"

using namespace qboltz;
using namespace qboltz::coleman_hepp;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Params make(int L, double beta_B, double weight_plus = 0.5, double phase = 0.0) {
    Params p;
    p.L = L;
    p.beta_B = beta_B;
    p.c_plus = std::sqrt(weight_plus);
    p.c_minus = std::polar(std::sqrt(1.0 - weight_plus), phase);
    return p;
}

double label_entropy(double wp) {
    return -wp * std::log(wp) - (1.0 - wp) * std::log(1.0 - wp);
}

// P_-^(0) rho P_+^(0): the block coupling system-down rows to system-up columns.
Matrix minus_plus_block(const Matrix& rho) {
    const Index half = rho.rows() / 2;
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    out.bottomLeftCorner(half, half) = rho.bottomLeftCorner(half, half);
    return out;
}

const std::array<double, 5> weights_plus{0.5, 0.9, 0.1, 0.3, 0.75};

}  // namespace

TEST(InitialState, ZeroTemperature) {
    const StructuredChainState s = initial_state(make(1, inf));
    ASSERT_EQ(s.branches().size(), 1U);
    EXPECT_EQ(config_string(s.branches()[0].config, 3), "111");
    EXPECT_EQ(s.branches()[0].weight, 1.0);
    EXPECT_EQ(s.minus_config(s.branches()[0]), s.branches()[0].config);
}

TEST(InitialState, InfiniteTemperature) {
    const StructuredChainState s = initial_state(make(0, 0.0));
    ASSERT_EQ(s.branches().size(), 2U);
    for (const Branch& b : s.branches()) {
        EXPECT_NEAR(b.weight, 0.5, 1e-15);
    }
}

TEST(InitialState, FiniteTemperatureWeights) {
    const StructuredChainState s = initial_state(make(0, 1.0));
    ASSERT_EQ(s.branches().size(), 2U);
    const double up = (1.0 + std::tanh(1.0)) / 2.0;
    for (const Branch& b : s.branches()) {
        EXPECT_NEAR(b.weight, b.config == 1 ? up : 1.0 - up, 1e-15);
    }
    EXPECT_NEAR(up, 0.8808, 1e-4);
}

TEST(InitialState, RejectsBadParams) {
    Params p = make(1, inf);
    p.c_plus = 1.0;
    EXPECT_THROW(initial_state(p), InvalidState);
    p = make(-1, inf);
    EXPECT_THROW(initial_state(p), InvalidState);
}

TEST(Step, FlipsMinusBranchOnly) {
    StructuredChainState s = initial_state(make(0, inf));
    s = step(s);
    const Branch& b = s.branches()[0];
    EXPECT_EQ(config_string(b.config, 1), "1");
    EXPECT_EQ(config_string(s.minus_config(b), 1), "0");
    EXPECT_NEAR(std::abs(b.amp_minus - Complex(0, -1) / std::sqrt(2.0)), 0.0, 1e-15);
    EXPECT_THROW(step(s), StepPastEnd);
}

TEST(Step, FullSweepFlipsWholeChain) {
    StructuredChainState s = initial_state(make(2, inf));
    for (int t = 0; t < 5; ++t) {
        s = step(s);
    }
    EXPECT_EQ(config_string(s.minus_config(s.branches()[0]), 5), "00000");
}

TEST(DenseEngine, GateMatchesFullUnitary) {
    for (const double bB : {inf, 0.7}) {
        const Params p = make(1, bB, 0.3, 0.4);
        DenseEngine engine(p);
        DensityMatrix rho = engine.state();
        for (int n = 1; n <= 3; ++n) {
            engine.step();
            rho = DenseEngine::step_unitary(1, n).apply(rho);
            EXPECT_LT(max_abs(engine.state().matrix() - rho.matrix()), 1e-13);
        }
    }
}

TEST(DenseEngine, MatchesStructuredAtEveryStep) {
    for (const double bB : {inf, 1.0, 0.5}) {
        for (int L = 0; L <= 2; ++L) {
            const Params p = make(L, bB, 0.3, 1.1);
            DenseEngine engine(p);
            StructuredChainState s = initial_state(p);
            for (int t = 0;; ++t) {
                EXPECT_LT(max_abs(engine.state().matrix() - density_matrix(s).matrix()), 1e-12)
                    << "L=" << L << " t=" << t;
                if (t == p.sites()) {
                    break;
                }
                engine.step();
                s = step(s);
            }
            EXPECT_THROW(engine.step(), StepPastEnd);
        }
    }
}

TEST(DensityMatrixOfBranches, FinalStateZeroTemperature) {
    const Params p = make(1, inf, 0.3, 0.2);
    StructuredChainState s = initial_state(p);
    for (int t = 0; t < 3; ++t) {
        s = step(s);
    }
    // c+ |+,111> + (-i)^3 c- |-,000>
    Vector v = Vector::Zero(16);
    v(0) = p.c_plus;
    v(15) = std::pow(Complex(0, -1), 3) * p.c_minus;
    EXPECT_LT(max_abs(density_matrix(s).matrix() - DensityMatrix::from_pure(PureState(v)).matrix()), 1e-15);
}

TEST(DensityMatrixOfBranches, Cap) {
    const StructuredChainState s = initial_state(make(3, inf));
    EXPECT_THROW(density_matrix(s, 2), DimensionCap);
    EXPECT_THROW(DenseEngine(make(3, inf), 2), DimensionCap);
}

TEST(PhaseCells, SignOfPolarization) {
    const ProjectorFamily cells = chain_phase_cells(1);
    // Chain index bits mark down spins: 000 is all up, 011 has one up.
    EXPECT_EQ(cells.cells()[0], 0);
    EXPECT_EQ(cells.cells()[1], 0);
    EXPECT_EQ(cells.cells()[3], 1);
    EXPECT_EQ(cells.cells()[7], 1);
    EXPECT_EQ(cells.label(0), 1.0);
    EXPECT_EQ(phase_cells(1).dim(), 16);
}

TEST(Curve, ZeroTemperatureEndpoints) {
    for (int L = 1; L <= 3; ++L) {
        for (const double wp : weights_plus) {
            const auto curve = qb_entropy_curve(make(L, inf, wp, 0.3));
            EXPECT_EQ(curve.front().s_qb, 0.0);
            EXPECT_NEAR(curve.back().s_qb, label_entropy(wp), 1e-12);
        }
    }
    EXPECT_NEAR(qb_entropy_curve(make(2, inf)).back().s_qb, std::log(2.0), 1e-15);
}

TEST(Curve, ZeroTemperatureJumpsPastMajority) {
    const auto curve = qb_entropy_curve(make(2, inf));
    for (const CurvePoint& c : curve) {
        EXPECT_NEAR(c.s_qb, c.t <= 2 ? 0.0 : std::log(2.0), 1e-15) << c.t;
    }
}

TEST(Curve, StructuredMatchesDense) {
    for (const double bB : {inf, 1.0, 0.5}) {
        for (int L = 0; L <= 3; ++L) {
            const Params p = make(L, bB, 0.3, 0.5);
            const auto fast = qb_entropy_curve(p);
            const auto dense = dense_qb_entropy_curve(p);
            ASSERT_EQ(fast.size(), dense.size());
            for (std::size_t t = 0; t < fast.size(); ++t) {
                EXPECT_NEAR(fast[t].s_qb, dense[t].s_qb, 1e-10) << "L=" << L << " bB=" << bB << " t=" << t;
                EXPECT_NEAR(fast[t].s_vn, dense[t].s_vn, 1e-10);
                EXPECT_NEAR(fast[t].witness, dense[t].witness, 1e-12);
            }
        }
    }
}

TEST(Curve, SecondLawAlongTheSweep) {
    for (const double bB : {inf, 1.0, 0.5}) {
        for (int L = 0; L <= 4; ++L) {
            for (const double wp : weights_plus) {
                const auto curve = qb_entropy_curve(make(L, bB, wp));
                for (const CurvePoint& c : curve) {
                    EXPECT_GE(c.s_qb, curve.front().s_qb - 1e-9);
                }
            }
        }
    }
}

TEST(Curve, InitialStateIsDecoherentAndPureAtZeroTemperature) {
    for (const double bB : {inf, 1.0}) {
        DenseEngine engine(make(2, bB, 0.6, 0.1));
        const ProjectorFamily cells = phase_cells(2);
        EXPECT_TRUE(is_decoherent(engine.state(), cells, 1e-12));
        for (int t = 0; t < 5; ++t) {
            if (bB == inf) {
                EXPECT_NEAR(von_neumann_entropy(engine.state()), 0.0, 1e-10);
            }
            engine.step();
        }
    }
}

TEST(EntropyJump, Examples) {
    EXPECT_NEAR(entropy_jump(make(2, inf)), std::log(2.0), 1e-15);
    EXPECT_NEAR(entropy_jump(make(2, inf, 0.9)), 0.325083, 1e-6);
    const Params p = make(2, 1.0);
    const double jump = entropy_jump(p);
    const auto dense = dense_qb_entropy_curve(p);
    EXPECT_GT(jump, 0.0);
    EXPECT_NEAR(jump, dense.back().s_qb - dense.front().s_qb, 1e-10);
}

TEST(EntropyJump, DegenerateAmplitudes) {
    Params p = make(1, 1.0);
    p.c_plus = 1.0;
    p.c_minus = 0.0;
    EXPECT_THROW(entropy_jump(p), DegenerateAmplitudes);
}

TEST(ChainMixture, MatchesReducedDenseState) {
    for (const double bB : {inf, 1.0, 0.5}) {
        const Params p = make(2, bB, 0.3);
        DenseEngine engine(p);
        for (int t = 0; t < p.sites(); ++t) {
            engine.step();
        }
        std::vector<Index> dims(6, 2);
        std::vector<std::size_t> keep{1, 2, 3, 4, 5};
        const double expected = von_neumann_entropy(partial_trace(engine.state(), dims, keep));
        EXPECT_NEAR(chain_mixture_entropy(p), expected, 1e-10);
        EXPECT_LE(chain_mixture_entropy(p), qb_entropy_curve(p).back().s_qb + 1e-12);
    }
}

TEST(CrossTermMass, Limits) {
    const CrossTermMass zero = cross_term_mass(make(3, inf));
    EXPECT_EQ(zero.m_plus, 0.0);
    EXPECT_LT(cross_term_mass(make(3, 30.0)).m_plus, 1e-20);
    const CrossTermMass half = cross_term_mass(make(3, 0.0));
    EXPECT_NEAR(half.m_plus, 0.5, 1e-15);
    EXPECT_NEAR(half.m_minus, 0.5, 1e-15);
}

TEST(CrossTermMass, MatchesEnumerationAndIsSymmetric) {
    for (const double bB : {0.5, 1.0}) {
        for (int L = 0; L <= 8; ++L) {
            const CrossTermMass m = cross_term_mass(make(L, bB));
            const double expected = oracle::minority_up_probability(2 * L + 1, (1.0 + std::tanh(bB)) / 2.0);
            EXPECT_NEAR(m.m_plus / expected, 1.0, 1e-12);
            EXPECT_NEAR(m.m_minus / m.m_plus, 1.0, 1e-12);
        }
    }
}

TEST(CrossTermMass, MatchesDenseTrace) {
    const Params p = make(2, 1.0);
    DenseEngine engine(p);
    const std::vector<Index> dims(6, 2);
    const std::vector<std::size_t> keep{1, 2, 3, 4, 5};
    const DensityMatrix omega = partial_trace(engine.state(), dims, keep);
    const double expected = branch_weights(omega, chain_phase_cells(2))[1];
    EXPECT_NEAR(cross_term_mass(p).m_plus, expected, 1e-14);
}

TEST(CrossTermMass, SlopeAtUnitField) {
    const double slope = cross_term_log_slope(1.0, 2, 12);
    const double target = -std::log(std::cosh(1.0));
    EXPECT_LT(std::abs(slope / target - 1.0), 0.10);
}

TEST(DecoherenceTime, Examples) {
    EXPECT_EQ(decoherence_time(10, 1.0, 1.0), 11.0);
    EXPECT_EQ(decoherence_time(7, 0.3, 0.3), 8.0);
    EXPECT_EQ(decoherence_time(8, 0.2, 0.5), decoherence_time(7, 0.2, 0.5) + 1.0);
}

TEST(OffdiagOverlap, MatchesDenseTrace) {
    random::Engine rng = random::stream(40, 0);
    for (const double bB : {inf, 1.0}) {
        const Params p = make(2, bB, 0.4, 0.9);
        DenseEngine engine(p);
        for (int t = 0;; ++t) {
            for (int m = 1; m <= 3; ++m) {
                const Matrix a = random::ginibre(Index{2} << m, Index{2} << m, rng);
                std::vector<Index> dims{Index{2} << m, Index{1} << (5 - m)};
                const Matrix full = tensor(a, identity(dims[1]));
                const Complex expected = (full * minus_plus_block(engine.state().matrix())).trace();
                EXPECT_LT(std::abs(offdiag_overlap(p, t, a) - expected), 1e-12) << "t=" << t << " m=" << m;
            }
            if (t == 5) {
                break;
            }
            engine.step();
        }
    }
}

TEST(OffdiagOverlap, VanishesPastDecoherenceTime) {
    random::Engine rng = random::stream(41, 0);
    const Params p = make(3, 1.0, 0.5, 0.2);
    for (int m = 1; m <= 4; ++m) {
        const Matrix a = random::ginibre(Index{2} << m, Index{2} << m, rng);
        const int t0 = static_cast<int>(decoherence_time(m, 1.0, 1.0));
        for (int t = t0; t <= p.sites(); ++t) {
            EXPECT_EQ(offdiag_overlap(p, t, a), Complex(0.0));
        }
        EXPECT_GT(std::abs(offdiag_overlap(p, m, a)), 1e-6);
    }
}

TEST(OffdiagOverlap, FlipStringUndoesMeasurement) {
    for (int L = 1; L <= 3; ++L) {
        for (const double wp : weights_plus) {
            for (const double bB : {inf, 1.0}) {
                const Params p = make(L, bB, wp, 0.7);
                const Complex z = offdiag_overlap(p, p.sites(), flip_string(L));
                EXPECT_NEAR(std::abs(z), std::abs(p.c_plus * p.c_minus), 1e-10);
            }
        }
    }
}

TEST(Witness, PresentAtFiniteTemperatureAndDecaying) {
    double previous = 1.0;
    for (int L = 1; L <= 8; ++L) {
        const double w = qb_entropy_curve(make(L, 1.0)).back().witness;
        EXPECT_GT(w, 0.0);
        EXPECT_LT(w, previous);
        previous = w;
    }
    const double up = (1.0 + std::tanh(1.0)) / 2.0;
    EXPECT_NEAR(qb_entropy_curve(make(6, 1.0)).back().witness, 0.5 * std::pow(up, 13), 1e-15);
}
