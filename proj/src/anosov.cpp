#include "qboltz/anosov.hpp"

#include <cmath>
#include <sstream>

namespace qboltz::anosov {

namespace {

double bump_shape(double x, double radius) {
    const double u = x / radius;
    if (std::abs(u) >= 1.0) {
        return 0.0;
    }
    return std::exp(-1.0 / (1.0 - u * u));
}

// Trapezoid weights on a grid whose end samples vanish reduce to h * sum.
template <typename F>
Complex trapezoid(const std::vector<double>& x, double h, F&& f) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double w = (j == 0 || j + 1 == x.size()) ? 0.5 : 1.0;
        s += w * f(x[j]);
    }
    return h * s;
}

}  // namespace

void Params::validate() const {
    if (lyapunov == 0.0 || !std::isfinite(lyapunov)) {
        throw InvalidState("anosov: lyapunov rate must be finite and nonzero");
    }
    if (!(coupling > 0.0)) {
        throw InvalidState("anosov: coupling mu must be positive");
    }
    if (!(support_radius > 0.0)) {
        throw InvalidState("anosov: support radius must be positive");
    }
    if (case_b) {
        if (case_b->alpha_p2 == 0.0) {
            throw InvalidState("anosov: case (b) needs alpha_p2 != 0");
        }
        if (!(case_b->re_lambda2 > 0.0)) {
            throw InvalidState("anosov: case (b) needs Re lambda2 > 0");
        }
        if (!(case_b->t0 >= 0.0)) {
            throw InvalidState("anosov: case (b) needs t0 >= 0");
        }
    }
}

WavePacket WavePacket::bump(double support_radius, int points) {
    if (!(support_radius > 0.0) || points < 3) {
        throw InvalidState("WavePacket::bump: need a positive radius and at least 3 points");
    }
    WavePacket w;
    w.radius_ = support_radius;
    w.h_ = 2.0 * support_radius / (points - 1);
    w.x_.resize(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) {
        w.x_[static_cast<std::size_t>(j)] = -support_radius + j * w.h_;
    }
    const double n2 = trapezoid(w.x_, w.h_, [&](double x) { return Complex(std::pow(bump_shape(x, support_radius), 2)); }).real();
    w.scale_ = 1.0 / std::sqrt(n2);
    w.values_.reserve(w.x_.size());
    for (const double x : w.x_) {
        w.values_.emplace_back(w.scale_ * bump_shape(x, support_radius));
    }
    return w;
}

Complex WavePacket::operator()(double x) const {
    return scale_ * bump_shape(x, radius_);
}

double WavePacket::norm_squared() const {
    double s = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
        const double w = (j == 0 || j + 1 == values_.size()) ? 0.5 : 1.0;
        s += w * std::norm(values_[j]);
    }
    return h_ * s;
}

void WavePacket::require_resolution(const char* where) const {
    if (1.0 / h_ < min_points_per_unit) {
        std::ostringstream os;
        os << where << ": grid has " << 1.0 / h_ << " points per unit length, need " << min_points_per_unit;
        throw GridTooCoarse(os.str());
    }
}

std::array<double, 2> hyperbolic_flow(double t, double lambda, std::array<double, 2> point) {
    const double c = std::cosh(lambda * t);
    const double s = std::sinh(lambda * t);
    return {c * point[0] + s * point[1], s * point[0] + c * point[1]};
}

std::array<double, 2> unstable_translation(double s, std::array<double, 2> point) {
    return {point[0] + s, point[1] + s};
}

double classical_flow_check(double t, double s, std::array<double, 2> point, double lambda) {
    const auto lhs = unstable_translation(s, hyperbolic_flow(t, lambda, point));
    const auto rhs = hyperbolic_flow(t, lambda, unstable_translation(s * std::exp(-lambda * t), point));
    return std::max(std::abs(lhs[0] - rhs[0]), std::abs(lhs[1] - rhs[1]));
}

double translation_magnitude(double t, const Params& p) {
    p.validate();
    if (t < 0.0) {
        throw InvalidState("translation_magnitude: t must be nonnegative");
    }
    // -expm1(-l t) keeps full precision for small l t.
    return -2.0 * p.coupling * std::expm1(-p.lyapunov * t) / p.lyapunov;
}

Complex translated_value(const WavePacket& phi, double s, double x) {
    return std::exp(Complex(0.0, -s * x - s * s / 2.0)) * phi(x + s);
}

Complex overlap_at_displacement(double s, const WavePacket& phi) {
    phi.require_resolution("overlap");
    const auto& x = phi.grid();
    const auto& v = phi.values();
    Complex sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double w = (j == 0 || j + 1 == x.size()) ? 0.5 : 1.0;
        sum += w * std::conj(v[j]) * translated_value(phi, s, x[j]);
    }
    return phi.spacing() * sum;
}

Complex overlap(double t, const WavePacket& phi, const Params& p) {
    return overlap_at_displacement(translation_magnitude(t, p), phi);
}

std::optional<double> oracle_threshold(const Params& p) {
    p.validate();
    const double ratio = p.support_radius * p.lyapunov / p.coupling;
    if (ratio >= 1.0) {
        return std::nullopt;
    }
    return -std::log1p(-ratio) / p.lyapunov;
}

CaseAReport decoherence_time_case_a(const Params& p) {
    p.validate();
    CaseAReport r;
    r.t01 = std::abs(std::log(2.0)) / p.lyapunov;
    r.a1 = p.support_radius * p.lyapunov / (4.0 * p.coupling);
    r.a1_below_one = r.a1 < 1.0;
    r.oracle_t_star = oracle_threshold(p);
    return r;
}

CaseBReport decoherence_time_case_b(const Params& p) {
    p.validate();
    if (!p.case_b) {
        throw MissingCaseB("decoherence_time_case_b: no case (b) constants supplied");
    }
    const CaseB& b = *p.case_b;
    CaseBReport r;
    r.a2 = p.support_radius * b.re_lambda2 * std::exp(b.t0 * b.re_lambda2) / (4.0 * p.coupling * b.alpha_p2);
    r.t02 = b.t0 + std::abs(std::log(2.0)) / b.re_lambda2;
    if (r.a2 < 1.0) {
        r.decoherence_time = r.t02;
    }
    return r;
}

double weyl_commutator_check(std::array<double, 2> alpha, std::array<double, 2> beta_gamma, const WavePacket& phi) {
    phi.require_resolution("weyl_commutator_check");
    const double h = phi.spacing();
    const double ax = alpha[0];
    const double ap = alpha[1];
    const double beta = beta_gamma[0];
    const double gamma = beta_gamma[1];
    if (std::abs(beta) * h > 0.5) {
        throw GridTooCoarse("weyl_commutator_check: grid does not resolve the phase exp(i beta x)");
    }
    auto w_apply = [&](auto&& f, double x) {
        return std::exp(Complex(0.0, beta * x + beta * gamma / 2.0)) * f(x + gamma);
    };
    auto k_apply = [&](auto&& f, double x) {
        return ap * Complex(0.0, -1.0) * (f(x + h) - f(x - h)) / (2.0 * h) + ax * x * f(x);
    };
    auto phi_f = [&](double x) { return phi(x); };
    auto w_phi = [&](double x) { return w_apply(phi_f, x); };
    auto k_phi = [&](double x) { return k_apply(phi_f, x); };

    const double factor = ap * beta - ax * gamma;
    // Covers the supports of phi and of its translate by gamma.
    const double lo = -phi.support_radius() - std::abs(gamma) - 2.0 * h;
    const double hi = phi.support_radius() + std::abs(gamma) + 2.0 * h;
    const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        const double x = lo + static_cast<double>(j) * h;
        const Complex kw = k_apply(w_phi, x);
        const Complex wk = w_apply(k_phi, x);
        sum += std::norm(kw - wk - factor * w_phi(x));
    }
    return std::sqrt(h * sum);
}

DensityMatrix reduced_system_state(Complex c_plus, Complex c_minus, Complex overlap_value) {
    Matrix m(2, 2);
    const Complex off = c_plus * std::conj(c_minus) * std::conj(overlap_value);
    m << std::norm(c_plus), off, std::conj(off), std::norm(c_minus);
    return DensityMatrix(std::move(m));
}

}  // namespace qboltz::anosov
