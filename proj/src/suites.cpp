#include "qboltz/suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "qboltz/entropy.hpp"
#include "qboltz/random.hpp"

namespace qboltz::suites {

namespace {

constexpr std::array<Index, 3> second_law_dims{4, 8, 16};

// Offsets keep the lemma suites on streams disjoint from each other and from
// the second-law trials for any trial count below 2^32.
std::uint64_t lemma_stream_index(Lemma lemma, std::uint64_t index) {
    return ((static_cast<std::uint64_t>(lemma) + 1) << 32) + index;
}

DensityMatrix mix(double l, const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(l * a.matrix() + (1.0 - l) * b.matrix(), DensityMatrix::Check::structural);
}

// S(r1|r2) <= bound + tol, as a slack; +inf on both sides counts as equal.
double upper_slack(double value, double bound) {
    if (std::isinf(value) && std::isinf(bound)) {
        return lemma_tolerance;
    }
    return bound + lemma_tolerance - value;
}

}  // namespace

SecondLawTrial second_law_trial(std::uint64_t seed, std::uint64_t index) {
    auto rng = random::stream(seed, index);
    SecondLawTrial t;
    t.dim = second_law_dims[index % second_law_dims.size()];
    std::uniform_int_distribution<std::size_t> cells(2, static_cast<std::size_t>(t.dim / 2));
    t.cells = cells(rng);
    const ProjectorFamily family = random::projector_family(t.dim, t.cells, rng);
    const DensityMatrix rho0 = pinch(random::density_matrix(t.dim, rng), family);
    const UnitaryMap u = random::unitary(t.dim, rng);
    const EntropyReport r = second_law_gap(rho0, u, family);
    t.s_qb_initial = r.s_qb_initial;
    t.s_qb_final = r.s_qb;
    t.gap = r.gap;
    t.witness = equality_witness(u.apply(rho0), family);
    return t;
}

std::string_view lemma_name(Lemma lemma) {
    switch (lemma) {
        case Lemma::nonnegativity: return "nonnegativity";
        case Lemma::identity: return "identity";
        case Lemma::domination: return "domination";
        case Lemma::joint_convexity: return "joint_convexity";
        case Lemma::monotonicity: return "monotonicity";
    }
    return "unknown";
}

double lemma_trial(Lemma lemma, std::uint64_t seed, std::uint64_t index) {
    auto rng = random::stream(seed, lemma_stream_index(lemma, index));
    std::uniform_int_distribution<Index> dim_dist(2, 8);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    const Index d = dim_dist(rng);
    // Every other trial uses a rank-deficient first argument.
    const Index rank = index % 2 == 0 ? 0 : std::max<Index>(1, d / 2);

    switch (lemma) {
        case Lemma::nonnegativity: {
            const DensityMatrix a = random::density_matrix(d, rng, rank);
            const DensityMatrix b = random::density_matrix(d, rng);
            return relative_entropy(a, b) + lemma_tolerance;
        }
        case Lemma::identity: {
            const DensityMatrix a = random::density_matrix(d, rng, rank);
            const DensityMatrix b = random::density_matrix(d, rng);
            const double self = relative_entropy(a, a);
            const double other = relative_entropy(a, b);
            // Distinct random states sit far apart, so S(a|b) must clear the tolerance.
            return std::min(lemma_tolerance - std::abs(self), other - lemma_tolerance);
        }
        case Lemma::domination: {
            const double l = unit(rng);
            const DensityMatrix a = random::density_matrix(d, rng, rank);
            const DensityMatrix s = random::density_matrix(d, rng, index % 3 == 0 ? 1 : 0);
            const DensityMatrix b = mix(l, a, s);
            if (!is_positive_semidefinite(b.matrix() - l * a.matrix())) {
                return -1.0;
            }
            return upper_slack(relative_entropy(a, b), -std::log(l));
        }
        case Lemma::joint_convexity: {
            const DensityMatrix r1 = random::density_matrix(d, rng, rank);
            const DensityMatrix r2 = random::density_matrix(d, rng, rank);
            const DensityMatrix s1 = random::density_matrix(d, rng);
            const DensityMatrix s2 = random::density_matrix(d, rng);
            const double e1 = relative_entropy(r1, s1);
            const double e2 = relative_entropy(r2, s2);
            double worst = std::numeric_limits<double>::infinity();
            for (int k = 1; k <= 9; ++k) {
                const double l = 0.1 * k;
                worst = std::min(worst, upper_slack(relative_entropy(mix(l, r1, r2), mix(l, s1, s2)), l * e1 + (1.0 - l) * e2));
            }
            return worst;
        }
        case Lemma::monotonicity: {
            // A bipartite dimension for the partial trace.
            const Index left = 2;
            const Index right = d;
            const Index n = left * right;
            const DensityMatrix a = random::density_matrix(n, rng, index % 2 == 0 ? 0 : right);
            const DensityMatrix b = random::density_matrix(n, rng);
            const double base = relative_entropy(a, b);

            std::uniform_int_distribution<std::size_t> cell_dist(2, static_cast<std::size_t>(n));
            const ProjectorFamily fam = random::projector_family(n, cell_dist(rng), rng);
            double worst = upper_slack(relative_entropy(pinch(a, fam), pinch(b, fam)), base);

            const std::array<Index, 2> dims{left, right};
            const std::array<std::size_t, 1> keep{index % 2};
            worst = std::min(worst, upper_slack(relative_entropy(partial_trace(a, dims, keep), partial_trace(b, dims, keep)), base));

            std::uniform_int_distribution<Index> out_dist(2, 8);
            std::uniform_int_distribution<std::size_t> extra_dist(0, 2);
            const Index out = out_dist(rng);
            // The Kraus operators slice an isometry, which needs count * out >= n.
            const auto count = static_cast<std::size_t>((n + out - 1) / out) + extra_dist(rng);
            const KrausMap k = random::kraus_map(n, out, count, rng);
            worst = std::min(worst, upper_slack(relative_entropy(k.apply(a), k.apply(b)), base));
            return worst;
        }
    }
    return -1.0;
}

}  // namespace qboltz::suites
