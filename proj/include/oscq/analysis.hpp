#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oscq/dae.hpp"
#include "oscq/linalg.hpp"
#include "oscq/pss.hpp"

namespace oscq {

struct PerturbDirection {
    enum class Kind { Explicit, Lambda2Eigenvector, Random };
    Kind kind = Kind::Lambda2Eigenvector;
    Vector vector;          // Explicit only
    std::uint64_t seed = 0; // Random only

    static PerturbDirection explicit_vector(Vector v) { return {Kind::Explicit, std::move(v), 0}; }
    static PerturbDirection lambda2() { return {Kind::Lambda2Eigenvector, {}, 0}; }
    static PerturbDirection random(std::uint64_t seed) { return {Kind::Random, {}, seed}; }
};

/// Per-cycle Poincare-crossing distances of a perturbed trajectory from the
/// periodic orbit's own crossing, with a log-linear fit of the decay.
struct DecayMeasurement {
    std::vector<int> cycle_index;
    std::vector<double> deviation;
    double noise_floor = 0.0;  // absolute; cycles below are excluded from the fit
    double grid_phase = 0.0;      // where the late crossings fall between grid points, in steps
    double reference_shift = 0.0; // |reference crossing - x_s(0)|
    int used_cycles = 0;
    double fitted_ratio = 0.0; // exp(slope of ln deviation per cycle)
    double empirical_q = 0.0;  // ln 0.05 / ln r; +inf when r >= 1
    bool non_decaying = false; // r within 1% of 1 or above
    Vector direction;          // unit direction actually applied
};

struct PerturbOptions {
    double eps = 1e-3;               // relative to the orbit swing
    int cycles = 20;
    double noise_floor_rel = 1e-12;  // relative to the orbit swing
};

/// Starts from x_s(0) + eps * swing * d and records one section crossing per
/// cycle. The same integrator and grid step as the PSS are used. Random
/// directions have the phase-mode component removed with the spectral
/// projector of X(T). Deviations are measured from the unperturbed orbit's
/// crossing taken at the same grid phase as the perturbed crossings. The fit
/// only uses the leading run of cycles above the noise floor
/// max(noise_floor_rel, 10 * closure) * swing.
DecayMeasurement perturb_and_measure(const DaeSystem& model, const PeriodicSteadyState& pss,
                                     const PerturbDirection& direction, const PerturbOptions& opts,
                                     const IntegratorConfig& integrator);

/// Least-squares slope of ln(deviation) against cycle index, exponentiated.
double fit_decay_ratio(const std::vector<int>& cycles, const std::vector<double>& deviation);

/// Average powers of the two halves of f(v) = K v - K tanh(a v) under
/// v = V sin(wt): p_pos = K V^2 / 2 and p_neg = <K tanh(a V sin) V sin>.
struct PowerBalanceCurve {
    std::vector<double> vmax;
    std::vector<double> p_pos;
    std::vector<double> p_neg;
    double intersection_vmax = 0.0;
    double slope_pos = 0.0;  // d p / d(V^2) at the intersection
    double slope_neg = 0.0;
    double gamma_deg = 0.0;  // angle of the positive-resistor curve
    double theta_deg = 0.0;  // angle between the curves
};

/// Composite Simpson average of K tanh(a V sin t) V sin t over one cycle.
double negative_power(double gain, double steepness, double vmax, int points = 512);

/// Curves on the given grid plus the bisected balance amplitude. `omega`
/// only fixes the time base; averages do not depend on it.
PowerBalanceCurve power_balance_curve(double gain, double steepness, double omega,
                                      const std::vector<double>& vmax_grid, int points = 512);

/// Second-order resonator quality factors at damping ratio zeta in (0, 1).
double ql1(double zeta); // sqrt(1 - zeta^2) / (2 zeta)
double ql2(double zeta); // 1 / (1 - exp(-4 pi zeta / sqrt(1 - zeta^2)))
double equivalence_gap(double zeta); // |2 pi ql2 / ql1 - 1|

} // namespace oscq
