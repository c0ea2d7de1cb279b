#include <cmath>
#include <numeric>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "qboltz/avalanche.hpp"
#include "qboltz/entropy.hpp"

using namespace qboltz;
using namespace qboltz::avalanche;

namespace {

Params with_permutation(const std::string& perm) {
    Params p;
    p.permutation = parse_permutation(perm);
    p.n = static_cast<int>(p.permutation.size());
    return p;
}

// Dense site permutation: the spin at site j moves to perm[j-1].
Matrix site_permutation_matrix(const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    const Index dim = Index{1} << n;
    Matrix m = Matrix::Zero(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        Index j = 0;
        for (int s = 1; s <= n; ++s) {
            if (i & (Index{1} << (n - s))) {
                j |= Index{1} << (n - perm[static_cast<std::size_t>(s - 1)]);
            }
        }
        m(j, i) = 1.0;
    }
    return m;
}

Matrix dense_step(const Params& p) {
    Matrix u = identity(Index{1} << p.n);
    for (int k = 1; 2 * k <= p.n; ++k) {
        u = pair_unitary(p.n, k).matrix() * u;
    }
    return site_permutation_matrix(p.permutation) * u;
}

Index rank_of(const std::vector<Vector>& vs) {
    if (vs.empty()) {
        return 0;
    }
    Matrix m(vs.front().size(), static_cast<Index>(vs.size()));
    for (std::size_t k = 0; k < vs.size(); ++k) {
        m.col(static_cast<Index>(k)) = vs[k];
    }
    Eigen::FullPivLU<Matrix> lu(m);
    return lu.rank();
}

}  // namespace

TEST(PairUnitary, PairRule) {
    const UnitaryMap u = pair_unitary(2, 1);
    // Basis order |++>, |+->, |-+>, |-->.
    EXPECT_EQ(u.matrix()(3, 2), Complex(1.0));  // |-+> -> |-->
    EXPECT_EQ(u.matrix()(0, 0), Complex(1.0));  // |++> fixed
    EXPECT_EQ(u.matrix()(1, 1), Complex(1.0));  // |+-> fixed
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(1, 1) = expected(2, 3) = expected(3, 2) = 1.0;
    EXPECT_EQ(max_abs(u.matrix() - expected), 0.0);
    EXPECT_EQ(max_abs(u.matrix() * u.matrix() - identity(4)), 0.0);
}

TEST(Permutation, ParseAndFormat) {
    EXPECT_EQ(parse_permutation("2341"), (std::vector<int>{2, 3, 4, 1}));
    EXPECT_EQ(parse_permutation("2, 3, 4, 1"), (std::vector<int>{2, 3, 4, 1}));
    EXPECT_EQ(format_permutation({2, 5, 4, 6, 1, 3}), "254613");
    Params p = with_permutation("2241");
    EXPECT_THROW(p.validate(), InvalidState);
    p = with_permutation("231");
    EXPECT_THROW(p.validate(), InvalidState);
}

TEST(Permutation, CycleNotation) {
    EXPECT_EQ(cycle_to_one_line({2, 3, 4, 1}, 4), (std::vector<int>{2, 3, 4, 1}));
    // (254613): 2 -> 5 -> 4 -> 6 -> 1 -> 3 -> 2.
    EXPECT_EQ(cycle_to_one_line({2, 5, 4, 6, 1, 3}, 6), (std::vector<int>{3, 5, 2, 6, 4, 1}));
    EXPECT_EQ(cycle_to_one_line({1, 2}, 3), (std::vector<int>{2, 1, 3}));
    EXPECT_THROW(cycle_to_one_line({1, 1}, 3), InvalidState);
}

TEST(Step, FrozenAllUp) {
    const Params p = with_permutation("2341");
    const PureState up = PureState::basis(16, 0);
    EXPECT_EQ(max_abs(avalanche_step(up, p).amplitudes() - up.amplitudes()), 0.0);
}

TEST(Step, FourSiteSequence) {
    const Params p = with_permutation("2341");
    std::uint64_t c = seed_config(4);
    EXPECT_EQ(config_string(c, 4), "-+++");
    const char* expected[] = {"+--+", "-+--", "+---", "++--", "+++-", "-+++"};
    for (const char* e : expected) {
        c = step_config(c, p);
        EXPECT_EQ(config_string(c, 4), e);
    }
}

TEST(Step, MatchesDenseOperators) {
    for (const char* perm : {"2341", "234516", "254613"}) {
        const Params p = with_permutation(perm);
        const Matrix u = dense_step(p);
        const Index dim = Index{1} << p.n;
        for (Index i = 0; i < dim; ++i) {
            const Vector out = avalanche_step(PureState::basis(dim, i), p).amplitudes();
            EXPECT_EQ(max_abs(out - u.col(i)), 0.0);
            // Basis states go to basis states.
            EXPECT_EQ(out.cwiseAbs().maxCoeff(), 1.0);
        }
    }
}

TEST(Orbit, FourSitesReproducesReportedDimensions) {
    const OrbitReport r = orbit_analysis(with_permutation("2341"));
    EXPECT_EQ(r.orbit_dim, 6U);
    EXPECT_EQ(r.sector_dims.at(-1), 2U);
    EXPECT_EQ(r.sector_dims.at(0), 2U);
    EXPECT_EQ(r.sector_dims.at(1), 2U);
    EXPECT_EQ(r.sector_dims.size(), 3U);
    EXPECT_EQ(r.magnetization_numerator, 0);
}

TEST(Orbit, RanksMatchLinearAlgebra) {
    for (const char* perm : {"2341", "234516"}) {
        const Params p = with_permutation(perm);
        const OrbitReport r = orbit_analysis(p);
        const Index dim = Index{1} << p.n;
        std::vector<Vector> vs;
        for (const auto c : r.orbit) {
            vs.push_back(PureState::basis(dim, static_cast<Index>(c)).amplitudes());
        }
        EXPECT_EQ(rank_of(vs), static_cast<Index>(r.orbit_dim));
        for (const auto& [m, d] : r.sector_dims) {
            std::vector<Vector> projected;
            for (const Vector& v : vs) {
                Vector w = v;
                for (Index i = 0; i < dim; ++i) {
                    if (twice_spin(static_cast<std::uint64_t>(i), p.n) != 2 * m) {
                        w(i) = 0.0;
                    }
                }
                projected.push_back(w);
            }
            EXPECT_EQ(rank_of(projected), static_cast<Index>(d)) << perm << " m=" << m;
        }
    }
}

TEST(Orbit, SixSiteCases) {
    const OrbitReport a = orbit_analysis(with_permutation("234516"));
    EXPECT_EQ(a.orbit_dim, 31U);
    EXPECT_EQ(a.magnetization_numerator, -3);
    const OrbitReport b = orbit_analysis(with_permutation("254613"));
    EXPECT_EQ(b.orbit_dim, 14U);
}

TEST(Orbit, NoSixSitePermutationHasOrbit26) {
    std::vector<int> perm{1, 2, 3, 4, 5, 6};
    bool found = false;
    do {
        Params p;
        p.n = 6;
        p.permutation = perm;
        found = found || orbit_analysis(p).orbit_dim == 26;
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_FALSE(found);
}

TEST(Orbit, IdentityWithoutFlips) {
    Params p = with_permutation("12");
    p.start = "++";
    const OrbitReport r = orbit_analysis(p);
    EXPECT_EQ(r.orbit_dim, 1U);
    EXPECT_EQ(r.mean_magnetization, 1.0);

    // From the default seed the pair partner flips on the first step.
    p = with_permutation("1234");
    EXPECT_EQ(orbit_analysis(p).orbit_dim, 2U);
    p.start = "+-";
    EXPECT_THROW(p.validate(), InvalidState);
}

TEST(Orbit, ClosesAndCaps) {
    Params p = with_permutation("234516");
    const OrbitReport r = orbit_analysis(p);
    std::uint64_t c = r.orbit.front();
    for (std::size_t k = 0; k < r.orbit.size(); ++k) {
        c = step_config(c, p);
    }
    EXPECT_EQ(c, r.orbit.front());
    EXPECT_EQ(r.entropy_curve.front(), r.entropy_curve.back());
    p.orbit_cap = 10;
    EXPECT_THROW(orbit_analysis(p), OrbitCap);
}

TEST(EntropyTrace, NoSplitWithoutMinusBranch) {
    Params p = with_permutation("2341");
    p.c_plus = 1.0;
    p.c_minus = 0.0;
    for (const TracePoint& t : entropy_trace(p)) {
        EXPECT_EQ(t.s_qb, 0.0);
    }
}

TEST(EntropyTrace, FluctuatesForFourSites) {
    const Params p = with_permutation("2341");
    const auto trace = entropy_trace(p);
    double lo = 1e9;
    double hi = -1e9;
    for (const TracePoint& t : trace) {
        lo = std::min(lo, t.s_qb);
        hi = std::max(hi, t.s_qb);
        EXPECT_NEAR(t.s_vn, std::log(2.0), 1e-12);
    }
    EXPECT_NEAR(trace.front().s_qb, 0.0, 1e-15);  // seed -+++ sits in the positive cell
    EXPECT_NEAR(hi, std::log(2.0), 1e-12);
    EXPECT_NEAR(lo, 0.0, 1e-15);
}

TEST(EntropyTrace, MatchesOrbitCurveAndDensePinching) {
    for (const char* perm : {"2341", "234516"}) {
        Params p = with_permutation(perm);
        p.c_plus = std::sqrt(0.3);
        p.c_minus = std::polar(std::sqrt(0.7), 0.5);
        const OrbitReport r = orbit_analysis(p);
        p.steps = static_cast<int>(r.orbit.size());
        const auto trace = entropy_trace(p);
        ASSERT_EQ(trace.size(), r.entropy_curve.size());
        for (std::size_t s = 0; s < trace.size(); ++s) {
            EXPECT_NEAR(trace[s].s_qb, r.entropy_curve[s], 1e-12);
        }
        // Step 0 by dense pinching on the full space.
        const Index half = Index{1} << p.n;
        Vector v = Vector::Zero(2 * half);
        v(0) = p.c_plus;
        v(half + static_cast<Index>(seed_config(p.n))) = p.c_minus;
        const double dense = quantum_boltzmann_entropy(DensityMatrix::from_pure(PureState(v)), sign_cells(p.n).lift_left(2));
        EXPECT_NEAR(trace.front().s_qb, dense, 1e-12);
    }
}

TEST(EntropyTrace, Cap) {
    Params p;
    p.n = 12;
    p.permutation.resize(12);
    std::iota(p.permutation.begin(), p.permutation.end(), 1);
    EXPECT_THROW(entropy_trace(p), DimensionCap);
}
