#include "qboltz/coleman_hepp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "qboltz/entropy.hpp"

namespace qboltz::coleman_hepp {

namespace {

constexpr Complex minus_i{0.0, -1.0};

std::uint64_t low_bits(int n) {
    return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

// Bits of the first t sites of an n-site configuration.
std::uint64_t front_mask(int t, int n) {
    return low_bits(t) << (n - t);
}

// k log x with 0 log 0 = 0.
double xlogy(double k, double x) {
    return k == 0.0 ? 0.0 : k * std::log(x);
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log of one configuration's probability with `ups` up spins out of n.
double log_config_weight(int ups, int n, double p) {
    return xlogy(ups, p) + xlogy(n - ups, 1.0 - p);
}

double binomial_pmf(int n, int k, double p) {
    if (p <= 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    if (p >= 1.0) {
        return k == n ? 1.0 : 0.0;
    }
    return std::exp(log_choose(n, k) + log_config_weight(k, n, p));
}

double binary_entropy(double p) {
    const double w[] = {p, 1.0 - p};
    return shannon_entropy(w);
}

void require_dense(int L, int dense_cap, const char* where) {
    if (L > dense_cap) {
        std::ostringstream os;
        os << where << ": L = " << L << " exceeds the dense cap " << dense_cap;
        throw DimensionCap(os.str());
    }
}

std::vector<int> chain_cells(int L) {
    const int n = 2 * L + 1;
    if (n > max_enumerated_sites) {
        throw DimensionCap("phase cells: chain too long to enumerate");
    }
    std::vector<int> cells(std::size_t{1} << n);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const int ups = n - std::popcount(i);
        cells[i] = ups > L ? 0 : 1;
    }
    return cells;
}

CurvePoint curve_point(const Params& p, int t) {
    const int n = p.sites();
    const int rest = n - t;
    const double up = p.up_probability();
    const double wp = std::norm(p.c_plus);
    const double wm = std::norm(p.c_minus);
    const double label_entropy = shannon_entropy(std::vector<double>{wp, wm});

    double split = 0.0;
    double log_max = -std::numeric_limits<double>::infinity();
    for (int u = 0; u <= t; ++u) {
        const double pu = binomial_pmf(t, u, up);
        if (pu == 0.0) {
            continue;
        }
        for (int v = 0; v <= rest; ++v) {
            const double pv = binomial_pmf(rest, v, up);
            if (pv == 0.0) {
                continue;
            }
            const bool plus_cell = u + v > p.L;
            const bool minus_cell = (t - u) + v > p.L;
            if (plus_cell != minus_cell) {
                split += pu * pv;
                log_max = std::max(log_max, log_config_weight(u + v, n, up));
            }
        }
    }
    CurvePoint c;
    c.t = t;
    c.s_vn = n * binary_entropy(up);
    c.s_qb = c.s_vn + label_entropy * split;
    c.witness = split > 0.0 ? std::abs(p.c_plus * p.c_minus) * std::exp(log_max) : 0.0;
    return c;
}

DensityMatrix dense_initial(const Params& p) {
    Matrix sys(2, 2);
    sys << std::norm(p.c_plus), p.c_plus * std::conj(p.c_minus), p.c_minus * std::conj(p.c_plus),
        std::norm(p.c_minus);
    const double up = p.up_probability();
    Matrix site = Matrix::Zero(2, 2);
    site(0, 0) = up;
    site(1, 1) = 1.0 - up;
    Matrix rho = sys;
    for (int k = 0; k < p.sites(); ++k) {
        rho = tensor(rho, site);
    }
    return DensityMatrix(std::move(rho), DensityMatrix::Check::structural);
}

Matrix minus_projector() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = 1.0;
    return m;
}

}  // namespace

double Params::up_probability() const {
    if (zero_temperature()) {
        return sign > 0 ? 1.0 : 0.0;
    }
    const double m = std::tanh(beta_B);
    return (1.0 + sign * m) / 2.0;
}

void Params::validate() const {
    if (L < 0) {
        throw InvalidState("coleman_hepp: L must be nonnegative so that N = 2L+1 is odd");
    }
    if (2 * L + 1 > 63) {
        throw DimensionCap("coleman_hepp: chains longer than 63 sites are not supported");
    }
    const double norm = std::norm(c_plus) + std::norm(c_minus);
    if (std::abs(norm - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "coleman_hepp: |c+|^2 + |c-|^2 = " << norm << ", must be 1";
        throw InvalidState(os.str());
    }
    if (!(beta_B >= 0.0)) {
        throw InvalidState("coleman_hepp: beta_B must be nonnegative");
    }
    if (sign != 1 && sign != -1) {
        throw InvalidState("coleman_hepp: sign must be +1 or -1");
    }
}

StructuredChainState::StructuredChainState(int sites, int time_step, std::vector<Branch> branches)
    : sites_(sites), t_(time_step), branches_(std::move(branches)) {
    if (sites_ < 1 || sites_ > 63 || t_ < 0 || t_ > sites_) {
        throw InvalidState("StructuredChainState: time step outside 0..N");
    }
    double total = 0.0;
    for (const Branch& b : branches_) {
        total += b.weight * (std::norm(b.amp_plus) + std::norm(b.amp_minus));
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidState("StructuredChainState: branch weights are not normalized");
    }
}

std::uint64_t StructuredChainState::minus_config(const Branch& b) const {
    return b.config ^ front_mask(t_, sites_);
}

std::string config_string(std::uint64_t config, int sites) {
    std::string s(static_cast<std::size_t>(sites), '0');
    for (int k = 1; k <= sites; ++k) {
        if ((config >> (sites - k)) & 1U) {
            s[static_cast<std::size_t>(k - 1)] = '1';
        }
    }
    return s;
}

Index chain_index(std::uint64_t config, int sites) {
    return static_cast<Index>(~config & low_bits(sites));
}

StructuredChainState initial_state(const Params& p) {
    p.validate();
    const int n = p.sites();
    const double up = p.up_probability();
    std::vector<Branch> branches;
    if (up == 1.0 || up == 0.0) {
        branches.push_back({up == 1.0 ? low_bits(n) : 0, 1.0, p.c_plus, p.c_minus});
        return StructuredChainState(n, 0, std::move(branches));
    }
    if (n > max_enumerated_sites) {
        throw DimensionCap("coleman_hepp::initial_state: too many configurations to enumerate");
    }
    const std::uint64_t count = std::uint64_t{1} << n;
    branches.reserve(count);
    for (std::uint64_t config = 0; config < count; ++config) {
        const double w = std::exp(log_config_weight(std::popcount(config), n, up));
        if (w > 0.0) {
            branches.push_back({config, w, p.c_plus, p.c_minus});
        }
    }
    // Summing 2^N rounded weights drifts by a few ulps; renormalize.
    double total = 0.0;
    for (const Branch& b : branches) {
        total += b.weight;
    }
    for (Branch& b : branches) {
        b.weight /= total;
    }
    return StructuredChainState(n, 0, std::move(branches));
}

StructuredChainState step(const StructuredChainState& s) {
    if (s.time_step() >= s.sites()) {
        throw StepPastEnd("coleman_hepp::step: the flip front has left the chain");
    }
    std::vector<Branch> next = s.branches();
    for (Branch& b : next) {
        b.amp_minus *= minus_i;
    }
    return StructuredChainState(s.sites(), s.time_step() + 1, std::move(next));
}

DensityMatrix density_matrix(const StructuredChainState& s, int dense_cap) {
    require_dense((s.sites() - 1) / 2, dense_cap, "coleman_hepp::density_matrix");
    const int n = s.sites();
    const Index half = Index{1} << n;
    Matrix rho = Matrix::Zero(2 * half, 2 * half);
    for (const Branch& b : s.branches()) {
        const Index ip = chain_index(b.config, n);
        const Index im = half + chain_index(s.minus_config(b), n);
        const Complex cross = b.weight * b.amp_plus * std::conj(b.amp_minus);
        rho(ip, ip) += b.weight * std::norm(b.amp_plus);
        rho(im, im) += b.weight * std::norm(b.amp_minus);
        rho(ip, im) += cross;
        rho(im, ip) += std::conj(cross);
    }
    return DensityMatrix(std::move(rho), DensityMatrix::Check::structural);
}

ProjectorFamily chain_phase_cells(int L) {
    return ProjectorFamily::from_cells(chain_cells(L), {1.0, -1.0});
}

ProjectorFamily phase_cells(int L) {
    return chain_phase_cells(L).lift_left(2);
}

std::vector<CurvePoint> qb_entropy_curve(const Params& p) {
    p.validate();
    std::vector<CurvePoint> curve;
    for (int t = 0; t <= p.sites(); ++t) {
        curve.push_back(curve_point(p, t));
    }
    return curve;
}

double entropy_jump(const Params& p) {
    p.validate();
    if (std::norm(p.c_plus) <= tol::zero_weight || std::norm(p.c_minus) <= tol::zero_weight) {
        throw DegenerateAmplitudes("coleman_hepp::entropy_jump: c_plus c_minus = 0, nothing is measured");
    }
    return curve_point(p, p.sites()).s_qb - curve_point(p, 0).s_qb;
}

double chain_mixture_entropy(const Params& p) {
    p.validate();
    const int n = p.sites();
    const double up = p.up_probability();
    const double wp = std::norm(p.c_plus);
    const double wm = std::norm(p.c_minus);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        // Per-configuration probability with k ups; the second term is the
        // fully flipped chain.
        const double a = wp > 0.0 ? std::log(wp) + log_config_weight(k, n, up) : -INFINITY;
        const double b = wm > 0.0 ? std::log(wm) + log_config_weight(k, n, 1.0 - up) : -INFINITY;
        if (std::isinf(a) && std::isinf(b)) {
            continue;
        }
        const double hi = std::max(a, b);
        const double lx = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
        s -= std::exp(log_choose(n, k) + lx) * lx;
    }
    return s;
}

CrossTermMass cross_term_mass(const Params& p) {
    p.validate();
    CrossTermMass m;
    if (p.zero_temperature()) {
        return m;
    }
    const int n = p.sites();
    const double up_plus = (1.0 + std::tanh(p.beta_B)) / 2.0;
    for (int k = 0; k <= n; ++k) {
        if (k <= p.L) {
            m.m_plus += binomial_pmf(n, k, up_plus);
        } else {
            m.m_minus += binomial_pmf(n, k, 1.0 - up_plus);
        }
    }
    return m;
}

double cross_term_log_slope(double beta_B, int l_from, int l_to) {
    if (l_to <= l_from) {
        throw InvalidState("cross_term_log_slope: need at least two chain lengths");
    }
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const double count = l_to - l_from + 1;
    for (int L = l_from; L <= l_to; ++L) {
        Params p;
        p.L = L;
        p.beta_B = beta_B;
        const double x = p.sites();
        const double y = std::log(cross_term_mass(p).m_plus);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double decoherence_time(int M, double w, double r) {
    if (M < 1) {
        throw InvalidState("decoherence_time: M must be at least 1");
    }
    return M + 1 - w + r;
}

Complex offdiag_overlap(const Params& p, int t, const Matrix& a, int dense_cap) {
    p.validate();
    const int n = p.sites();
    if (t < 0 || t > n) {
        throw InvalidState("offdiag_overlap: t outside 0..N");
    }
    if (a.rows() != a.cols() || a.rows() < 2 || !std::has_single_bit(static_cast<std::uint64_t>(a.rows()))) {
        throw DimensionMismatch("offdiag_overlap: observable must be 2^(M+1) square");
    }
    const int m = std::countr_zero(static_cast<std::uint64_t>(a.rows())) - 1;
    if (m > n) {
        throw DimensionMismatch("offdiag_overlap: observable reaches past the chain");
    }
    if (m > 2 * dense_cap + 1) {
        throw DimensionCap("offdiag_overlap: observable exceeds the dense cap");
    }
    if (t > m) {
        // The two branches differ on a site A does not touch.
        return 0.0;
    }
    // Sites beyond M agree in both branches and their weights sum to 1, so
    // only the first M sites are enumerated.
    const double up = p.up_probability();
    const Complex phase = std::conj(p.c_plus) * p.c_minus * std::pow(minus_i, t);
    const Index half = Index{1} << m;
    Complex sum = 0.0;
    for (std::uint64_t head = 0; head < static_cast<std::uint64_t>(half); ++head) {
        const double w = std::exp(log_config_weight(std::popcount(head), m, up));
        if (w == 0.0) {
            continue;
        }
        const std::uint64_t flipped = head ^ front_mask(t, m);
        sum += w * a(chain_index(head, m), half + chain_index(flipped, m));
    }
    return phase * sum;
}

Matrix flip_string(int L) {
    const Index dim = Index{2} << (2 * L + 1);
    Matrix z = Matrix::Zero(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        z(i, dim - 1 - i) = 1.0;
    }
    return z;
}

DenseEngine::DenseEngine(const Params& p, int dense_cap)
    : sites_(p.sites()), rho_((p.validate(), require_dense(p.L, dense_cap, "DenseEngine"), dense_initial(p))) {}

UnitaryMap DenseEngine::step_unitary(int L, int n) {
    const int sites = 2 * L + 1;
    if (n < 1 || n > sites) {
        throw InvalidState("DenseEngine::step_unitary: site outside 1..N");
    }
    const std::vector<Index> dims(static_cast<std::size_t>(sites) + 1, 2);
    const Matrix generator = embed_site(minus_projector(), 0, dims) * embed_site(pauli_x(), static_cast<std::size_t>(n), dims);
    return UnitaryMap::exp_i(-std::numbers::pi / 2.0 * generator);
}

void DenseEngine::step() {
    if (t_ >= sites_) {
        throw StepPastEnd("DenseEngine::step: the flip front has left the chain");
    }
    const int n = t_ + 1;
    const Matrix gate = UnitaryMap::exp_i(-std::numbers::pi / 2.0 * tensor(minus_projector(), pauli_x())).matrix();
    Matrix m = rho_.matrix();
    const Index dim = m.rows();
    const Index sys_bit = Index{1} << sites_;
    const Index site_bit = Index{1} << (sites_ - n);
    std::vector<Index> bases;
    for (Index b = 0; b < dim; ++b) {
        if (!(b & sys_bit) && !(b & site_bit)) {
            bases.push_back(b);
        }
    }
    // rho -> G rho G^dagger on the (system, site n) factor pair.
    for (const Index b : bases) {
        const Index idx[4] = {b, b | site_bit, b | sys_bit, b | sys_bit | site_bit};
        for (Index c = 0; c < dim; ++c) {
            Complex v[4];
            for (int k = 0; k < 4; ++k) {
                v[k] = m(idx[k], c);
            }
            for (int r = 0; r < 4; ++r) {
                Complex s = 0.0;
                for (int k = 0; k < 4; ++k) {
                    s += gate(r, k) * v[k];
                }
                m(idx[r], c) = s;
            }
        }
    }
    for (const Index b : bases) {
        const Index idx[4] = {b, b | site_bit, b | sys_bit, b | sys_bit | site_bit};
        for (Index r = 0; r < dim; ++r) {
            Complex v[4];
            for (int k = 0; k < 4; ++k) {
                v[k] = m(r, idx[k]);
            }
            for (int j = 0; j < 4; ++j) {
                Complex s = 0.0;
                for (int k = 0; k < 4; ++k) {
                    s += v[k] * std::conj(gate(j, k));
                }
                m(r, idx[j]) = s;
            }
        }
    }
    rho_ = DensityMatrix(std::move(m), DensityMatrix::Check::structural);
    ++t_;
}

std::vector<CurvePoint> dense_qb_entropy_curve(const Params& p, int dense_cap) {
    DenseEngine engine(p, dense_cap);
    const ProjectorFamily cells = phase_cells(p.L);
    std::vector<CurvePoint> curve;
    for (int t = 0;; ++t) {
        const DensityMatrix& rho = engine.state();
        curve.push_back({t, von_neumann_entropy(rho), quantum_boltzmann_entropy(rho, cells), equality_witness(rho, cells)});
        if (t == engine.sites()) {
            break;
        }
        engine.step();
    }
    return curve;
}

}  // namespace qboltz::coleman_hepp
