#pragma once

#include <array>
#include <optional>
#include <vector>

#include "qboltz/qstate.hpp"

namespace qboltz::anosov {

struct CaseB {
    double re_lambda2 = 1.0;
    double alpha_p2 = 1.0;
    double t0 = 0.0;
};

struct Params {
    double lyapunov = 1.0;        ///< lambda, nonzero
    double coupling = 1.0;        ///< mu > 0
    double support_radius = 1.0;  ///< S0 > 0: the packet vanishes for |x| > S0
    std::optional<CaseB> case_b;

    /// Throws InvalidState on a violated invariant.
    void validate() const;
};

/// Minimum grid density accepted by the quadratures.
inline constexpr double min_points_per_unit = 16.0;

/// Compactly supported wave function sampled on a uniform grid. The exact
/// profile is kept alongside the samples so translated copies can be
/// evaluated off the grid.
class WavePacket {
public:
    /// Normalized C-infinity bump exp(-1/(1-(x/S0)^2)) on [-S0, S0]. The
    /// normalization is by trapezoid quadrature on the sampling grid.
    static WavePacket bump(double support_radius, int points = 512);

    double support_radius() const { return radius_; }
    double spacing() const { return h_; }
    const std::vector<double>& grid() const { return x_; }
    const std::vector<Complex>& values() const { return values_; }

    /// Exact (normalized) profile at any x; zero outside the support.
    Complex operator()(double x) const;

    /// Trapezoid quadrature of |phi|^2.
    double norm_squared() const;

    /// Throws GridTooCoarse below min_points_per_unit.
    void require_resolution(const char* where) const;

private:
    WavePacket() = default;

    double radius_ = 0.0;
    double h_ = 0.0;
    double scale_ = 1.0;
    std::vector<double> x_;
    std::vector<Complex> values_;
};

/// tau_t(x, p) = (cosh(lt) x + sinh(lt) p, sinh(lt) x + cosh(lt) p),
/// the hyperbolic flow of the inverted oscillator with rate l.
std::array<double, 2> hyperbolic_flow(double t, double lambda, std::array<double, 2> point);
/// sigma_s(x, p) = (x + s, p + s), translation along the unstable direction.
std::array<double, 2> unstable_translation(double s, std::array<double, 2> point);

/// max component of |sigma_s(tau_t(z)) - tau_t(sigma_{s exp(-lambda t)}(z))|.
double classical_flow_check(double t, double s, std::array<double, 2> point, double lambda);

/// s(t) = 2 mu (1 - exp(-lambda t)) / lambda.
double translation_magnitude(double t, const Params& p);

/// (exp(i s K) psi)(x) = exp(-i s x) exp(-i s^2 / 2) psi(x + s) for K = p - x.
Complex translated_value(const WavePacket& phi, double s, double x);

/// Trapezoid quadrature of (phi, exp(i s(t) K) phi). Throws GridTooCoarse.
Complex overlap(double t, const WavePacket& phi, const Params& p);

/// Same quadrature for an explicit displacement s.
Complex overlap_at_displacement(double s, const WavePacket& phi);

/// First t with s(t) = 2 S0, after which the translated packet is disjoint
/// from the original; nullopt when s never gets there.
std::optional<double> oracle_threshold(const Params& p);

struct CaseAReport {
    double t01 = 0.0;  ///< |log 2| / lambda as printed
    double a1 = 0.0;   ///< S0 lambda / (4 mu) as printed
    bool a1_below_one = false;  ///< a1 < 1
    std::optional<double> oracle_t_star;
};

CaseAReport decoherence_time_case_a(const Params& p);

struct CaseBReport {
    double a2 = 0.0;   ///< S0 Re(l2) exp(t0 Re(l2)) / (4 mu alpha_p2) as printed
    double t02 = 0.0;  ///< t0 + |log 2| / Re(l2) as printed
    std::optional<double> decoherence_time;  ///< t02 when a2 < 1
};

/// Throws MissingCaseB when the case-(b) constants are absent.
CaseBReport decoherence_time_case_b(const Params& p);

/// Quadrature norm of [K_a, W(b, g)] phi - (a_p b - a_x g) W(b, g) phi with
/// K_a = a_p (-i d/dx) + a_x x by central differences and
/// (W(b, g) psi)(x) = exp(i b x) exp(i b g / 2) psi(x + g).
/// alpha = (a_x, a_p), beta_gamma = (b, g). Second order in the grid spacing.
double weyl_commutator_check(std::array<double, 2> alpha, std::array<double, 2> beta_gamma, const WavePacket& phi);

/// 2x2 reduced state of the system for c+ |+> phi + c- |-> exp(i s K) phi:
/// diagonal |c+|^2, |c-|^2 and off-diagonal c+ conj(c-) conj(overlap).
DensityMatrix reduced_system_state(Complex c_plus, Complex c_minus, Complex overlap_value);

}  // namespace qboltz::anosov
