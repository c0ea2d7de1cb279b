#include "qboltz/avalanche.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "qboltz/entropy.hpp"

namespace qboltz::avalanche {

namespace {

std::uint64_t site_bit(int site, int n) {
    return std::uint64_t{1} << (n - site);
}

bool is_down(std::uint64_t config, int site, int n) {
    return (config & site_bit(site, n)) != 0;
}

std::uint64_t apply_pair(std::uint64_t config, int k, int n) {
    return is_down(config, 2 * k - 1, n) ? config ^ site_bit(2 * k, n) : config;
}

std::uint64_t apply_permutation(std::uint64_t config, const std::vector<int>& perm, int n) {
    std::uint64_t out = 0;
    for (int j = 1; j <= n; ++j) {
        if (is_down(config, j, n)) {
            out |= site_bit(perm[static_cast<std::size_t>(j - 1)], n);
        }
    }
    return out;
}

// Moves every amplitude to the image of its configuration.
Vector permute_amplitudes(const Vector& v, const Params& p) {
    Vector out = Vector::Zero(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        out(static_cast<Index>(step_config(static_cast<std::uint64_t>(i), p))) = v(i);
    }
    return out;
}

}  // namespace

void Params::validate() const {
    if (n < 2 || n % 2 != 0) {
        throw InvalidState("avalanche: n must be a positive even number of apparatus spins");
    }
    if (n > 62) {
        throw DimensionCap("avalanche: n is too large");
    }
    if (permutation.size() != static_cast<std::size_t>(n)) {
        throw InvalidState("avalanche: permutation must list one target per site");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const int target : permutation) {
        if (target < 1 || target > n || seen[static_cast<std::size_t>(target - 1)]) {
            throw InvalidState("avalanche: permutation is not a bijection on 1..n");
        }
        seen[static_cast<std::size_t>(target - 1)] = true;
    }
    if (!start.empty()) {
        if (start.size() != static_cast<std::size_t>(n) || start.find_first_not_of("+-") != std::string::npos) {
            throw InvalidState("avalanche: start must give '+' or '-' for every site");
        }
    }
    if (steps < 0) {
        throw InvalidState("avalanche: steps must be nonnegative");
    }
    const double norm = std::norm(c_plus) + std::norm(c_minus);
    if (std::abs(norm - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "avalanche: |c+|^2 + |c-|^2 = " << norm << ", must be 1";
        throw InvalidState(os.str());
    }
}

std::uint64_t Params::start_config() const {
    if (start.empty()) {
        return seed_config(n);
    }
    std::uint64_t c = 0;
    for (int j = 1; j <= n; ++j) {
        if (start[static_cast<std::size_t>(j - 1)] == '-') {
            c |= site_bit(j, n);
        }
    }
    return c;
}

std::vector<int> parse_permutation(const std::string& text) {
    std::vector<int> out;
    const bool separated = text.find_first_of(", ") != std::string::npos;
    if (separated) {
        std::string token;
        std::istringstream is(text);
        while (std::getline(is, token, ',')) {
            std::istringstream ts(token);
            int v = 0;
            while (ts >> v) {
                out.push_back(v);
            }
        }
    } else {
        for (const char c : text) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                throw InvalidState("avalanche: permutation must contain digits only");
            }
            out.push_back(c - '0');
        }
    }
    if (out.empty()) {
        throw InvalidState("avalanche: empty permutation");
    }
    return out;
}

std::string format_permutation(const std::vector<int>& permutation) {
    const bool compact = permutation.size() <= 9;
    std::ostringstream os;
    for (std::size_t j = 0; j < permutation.size(); ++j) {
        if (!compact && j > 0) {
            os << ',';
        }
        os << permutation[j];
    }
    return os.str();
}

std::vector<int> cycle_to_one_line(const std::vector<int>& cycle, int n) {
    std::vector<int> out(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(out.begin(), out.end(), 1);
    std::vector<bool> seen(out.size(), false);
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        const int from = cycle[k];
        if (from < 1 || from > n || seen[static_cast<std::size_t>(from - 1)]) {
            throw InvalidState("avalanche: cycle entries must be distinct sites in 1..n");
        }
        seen[static_cast<std::size_t>(from - 1)] = true;
        out[static_cast<std::size_t>(from - 1)] = cycle[(k + 1) % cycle.size()];
    }
    return out;
}

std::uint64_t seed_config(int n) {
    return site_bit(1, n);
}

int twice_spin(std::uint64_t config, int n) {
    return n - 2 * std::popcount(config);
}

std::string config_string(std::uint64_t config, int n) {
    std::string s;
    for (int j = 1; j <= n; ++j) {
        s += is_down(config, j, n) ? '-' : '+';
    }
    return s;
}

UnitaryMap pair_unitary(int n, int k) {
    if (n < 2 || k < 1 || 2 * k > n || n > max_orbit_sites) {
        throw DimensionMismatch("avalanche::pair_unitary: pair outside the register");
    }
    const Index dim = Index{1} << n;
    Matrix u = Matrix::Zero(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        u(static_cast<Index>(apply_pair(static_cast<std::uint64_t>(i), k, n)), i) = 1.0;
    }
    return UnitaryMap(std::move(u));
}

std::uint64_t step_config(std::uint64_t config, const Params& p) {
    for (int k = 1; 2 * k <= p.n; ++k) {
        config = apply_pair(config, k, p.n);
    }
    return apply_permutation(config, p.permutation, p.n);
}

PureState avalanche_step(const PureState& state, const Params& p) {
    p.validate();
    if (p.n > max_orbit_sites || state.dim() != (Index{1} << p.n)) {
        throw DimensionMismatch("avalanche_step: state is not a 2^n apparatus vector");
    }
    return PureState(permute_amplitudes(state.amplitudes(), p));
}

OrbitReport orbit_analysis(const Params& p) {
    p.validate();
    if (p.n > max_orbit_sites) {
        throw DimensionCap("avalanche::orbit_analysis: n exceeds the orbit cap of 12 sites");
    }
    const std::uint64_t cap = p.orbit_cap == 0 ? (std::uint64_t{1} << p.n) : p.orbit_cap;
    OrbitReport r;
    const std::uint64_t seed = p.start_config();
    std::uint64_t c = seed;
    do {
        if (r.orbit.size() >= cap) {
            std::ostringstream os;
            os << "avalanche::orbit_analysis: orbit longer than " << cap;
            throw OrbitCap(os.str());
        }
        r.orbit.push_back(c);
        c = step_config(c, p);
    } while (c != seed);

    // Orbit elements are distinct basis vectors and P(m) maps each of them
    // either to itself or to zero, so both ranks are plain counts.
    const std::set<std::uint64_t> distinct(r.orbit.begin(), r.orbit.end());
    r.orbit_dim = distinct.size();
    for (const std::uint64_t v : distinct) {
        ++r.sector_dims[twice_spin(v, p.n) / 2];
    }
    for (const std::uint64_t v : r.orbit) {
        r.magnetization_numerator += twice_spin(v, p.n) / 2;
    }
    r.mean_magnetization = static_cast<double>(r.magnetization_numerator) / static_cast<double>(r.orbit.size());

    const double label_entropy = shannon_entropy(std::vector<double>{std::norm(p.c_plus), std::norm(p.c_minus)});
    for (std::size_t s = 0; s <= r.orbit.size(); ++s) {
        const bool minus_positive = twice_spin(r.orbit[s % r.orbit.size()], p.n) > 0;
        // The frozen branch stays all up, in the positive cell.
        r.entropy_curve.push_back(minus_positive ? 0.0 : label_entropy);
    }
    return r;
}

ProjectorFamily sign_cells(int n) {
    if (n > max_orbit_sites) {
        throw DimensionCap("avalanche::sign_cells: register too large");
    }
    std::vector<int> cells(std::size_t{1} << n);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i] = twice_spin(i, n) > 0 ? 0 : 1;
    }
    return ProjectorFamily::from_cells(std::move(cells), {1.0, -1.0});
}

std::vector<TracePoint> entropy_trace(const Params& p) {
    p.validate();
    if (p.n > max_trace_sites) {
        throw DimensionCap("avalanche::entropy_trace: n exceeds the dense cap of 10 sites");
    }
    const Index half = Index{1} << p.n;
    Vector up = Vector::Zero(half);
    up(0) = p.c_plus;
    Vector down = Vector::Zero(half);
    down(static_cast<Index>(p.start_config())) = p.c_minus;
    const ProjectorFamily cells = sign_cells(p.n).lift_left(2);

    std::vector<TracePoint> out;
    for (int s = 0; s <= p.steps; ++s) {
        Vector full(2 * half);
        full << up, down;
        // Reduced apparatus state: its nonzero spectrum is that of the 2x2 Gram
        // matrix of the two system components.
        Matrix gram(2, 2);
        gram << up.squaredNorm(), up.dot(down), down.dot(up), down.squaredNorm();
        const Eigen::VectorXd ev = hermitian_eigenvalues(gram).cwiseMax(0.0);
        const std::vector<double> spectrum(ev.data(), ev.data() + ev.size());
        out.push_back({s, quantum_boltzmann_entropy(PureState(full), cells), shannon_entropy(spectrum)});
        up = permute_amplitudes(up, p);
        down = permute_amplitudes(down, p);
    }
    return out;
}

}  // namespace qboltz::avalanche
