#include "oscq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oscq/eigen_qr.hpp"
#include "oscq/errors.hpp"
#include "oscq/floquet.hpp"

namespace oscq {

double fit_decay_ratio(const std::vector<int>& cycles, const std::vector<double>& deviation) {
    const std::size_t m = cycles.size();
    if (m < 2 || deviation.size() != m) {
        throw AnalysisError("fit_decay_ratio: need at least two points");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mean_x += cycles[i];
        mean_y += std::log(deviation[i]);
    }
    mean_x /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = cycles[i] - mean_x;
        sxy += dx * (std::log(deviation[i]) - mean_y);
        sxx += dx * dx;
    }
    return std::exp(sxy / sxx);
}

namespace {

Vector perturbation_direction(const DaeSystem& model, const PeriodicSteadyState& pss,
                              const PerturbDirection& direction) {
    const int n = model.size();
    switch (direction.kind) {
    case PerturbDirection::Kind::Explicit:
        if (direction.vector.size() != n || !(direction.vector.norm() > 0.0)) {
            throw AnalysisError("perturbation direction must be a non-zero vector of length " +
                                std::to_string(n));
        }
        return direction.vector.normalized();
    case PerturbDirection::Kind::Lambda2Eigenvector: {
        const Matrix xT = fundamental_matrix(model, pss);
        const QReport report = q_factor(eigen_spectrum(xT), 1e-4, pss.period);
        const ComplexVector ev = eigenvector(xT, report.lambda2);
        Vector d = ev.real();
        if (!(d.norm() > 0.0)) {
            d = ev.imag();
        }
        return d.normalized();
    }
    case PerturbDirection::Kind::Random: {
        std::mt19937_64 rng(direction.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector d(n);
        for (int i = 0; i < n; ++i) {
            d(i) = normal(rng);
        }
        const Matrix xT = fundamental_matrix(model, pss);
        d = phase_projector(xT, model.velocity(pss.x0())) * d;
        if (!(d.norm() > 0.0)) {
            throw AnalysisError("random direction vanished after removing the phase component");
        }
        return d.normalized();
    }
    }
    throw AnalysisError("unknown perturbation direction");
}

/// Crossing of the unperturbed discrete flow at a given grid phase. Starting
/// from x_s(0) with a partial step of (1 - delta) h puts later crossings delta h
/// after a grid point; after `cycles` periods the start-up offset has decayed
/// like the perturbation itself.
Vector phase_matched_reference(const DaeSystem& model, const PeriodicSteadyState& pss, double delta,
                               int cycles, const IntegratorConfig& cfg) {
    const Vector x0 = pss.x0();
    const double h = pss.step();
    const double lead = (1.0 - delta) * h;
    if (lead <= 1e-12 * h || lead >= (1.0 - 1e-12) * h) {
        return x0;
    }
    const Vector start = implicit_step(model, x0, model.q(x0), model.f(x0), lead, cfg, lead).x;
    const long steps = static_cast<long>(cycles) * pss.steps + 1;
    const Waveform wave = integrate_steps(model, start, lead, h, steps, cfg);
    const auto crossings = section_crossings(model, wave, pss.phase, cfg, pss.orbit_scale);
    if (crossings.empty()) {
        return x0;
    }
    return crossings.back().x;
}

} // namespace

DecayMeasurement perturb_and_measure(const DaeSystem& model, const PeriodicSteadyState& pss,
                                     const PerturbDirection& direction, const PerturbOptions& opts,
                                     const IntegratorConfig& integrator) {
    if (!(opts.eps >= 1e-6 && opts.eps <= 1e-2)) {
        throw AnalysisError("eps must lie in [1e-6, 1e-2] (relative to the orbit swing)");
    }
    if (opts.cycles < 3) {
        throw AnalysisError("need at least three cycles");
    }
    DecayMeasurement out;
    out.direction = perturbation_direction(model, pss, direction);
    const double swing = pss.orbit_scale;
    const Vector start = pss.x0() + opts.eps * swing * out.direction;

    IntegratorConfig cfg = integrator;
    cfg.method = pss.method;
    const long steps = static_cast<long>(opts.cycles + 1) * pss.steps;
    const Waveform wave = integrate_steps(model, start, 0.0, pss.step(), steps, cfg);
    std::vector<SectionCrossing> crossings;
    for (const SectionCrossing& c : section_crossings(model, wave, pss.phase, cfg, swing)) {
        if (c.t >= 0.5 * pss.period && static_cast<int>(crossings.size()) < opts.cycles) {
            crossings.push_back(c);
        }
    }
    if (crossings.empty()) {
        throw AnalysisError("perturbed trajectory never returned to the section");
    }

    // The perturbation leaves a small time shift behind, and a fixed-step
    // orbit crosses the section at a point that depends on where the crossing
    // falls between grid points. Compare against the unperturbed orbit at the
    // grid phase the perturbed trajectory settles to.
    const double h = pss.step();
    const double ratio = crossings.back().t / h;
    out.grid_phase = ratio - std::floor(ratio);
    const Vector reference =
        phase_matched_reference(model, pss, out.grid_phase, opts.cycles, cfg);
    out.reference_shift = (reference - pss.x0()).norm();

    out.noise_floor = std::max(opts.noise_floor_rel, 10.0 * pss.closure_residual) * swing;
    bool above = true;
    std::vector<int> fit_cycles;
    std::vector<double> fit_dev;
    for (const SectionCrossing& c : crossings) {
        const int k = static_cast<int>(out.cycle_index.size()) + 1;
        const double dev = (c.x - reference).norm();
        out.cycle_index.push_back(k);
        out.deviation.push_back(dev);
        above = above && dev > out.noise_floor;
        if (above) {
            fit_cycles.push_back(k);
            fit_dev.push_back(dev);
        }
    }
    out.used_cycles = static_cast<int>(fit_cycles.size());
    if (out.used_cycles < 3) {
        throw AnalysisError("too few usable cycles above the noise floor (" +
                            std::to_string(out.used_cycles) + "); use a larger eps");
    }
    out.fitted_ratio = fit_decay_ratio(fit_cycles, fit_dev);
    out.non_decaying = out.fitted_ratio >= 0.99;
    out.empirical_q = out.fitted_ratio < 1.0 ? q_from_lambda2(out.fitted_ratio)
                                             : std::numeric_limits<double>::infinity();
    return out;
}

double negative_power(double gain, double steepness, double vmax, int points) {
    if (points < 2 || points % 2 != 0) {
        throw AnalysisError("Simpson quadrature needs an even number of intervals");
    }
    const double h = 2.0 * std::numbers::pi / points;
    auto integrand = [&](double phase) {
        const double v = vmax * std::sin(phase);
        return gain * std::tanh(steepness * v) * v;
    };
    double sum = integrand(0.0) + integrand(2.0 * std::numbers::pi);
    for (int i = 1; i < points; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i * h);
    }
    return sum * h / 3.0 / (2.0 * std::numbers::pi);
}

PowerBalanceCurve power_balance_curve(double gain, double steepness, double omega,
                                      const std::vector<double>& vmax_grid, int points) {
    if (!(gain > 0.0) || !(steepness > 0.0) || !(omega > 0.0)) {
        throw AnalysisError("power balance: K, a and omega must be positive");
    }
    if (vmax_grid.size() < 2) {
        throw AnalysisError("power balance: grid needs at least two points");
    }
    for (std::size_t i = 0; i < vmax_grid.size(); ++i) {
        if (!(vmax_grid[i] > 0.0) || (i > 0 && !(vmax_grid[i] > vmax_grid[i - 1]))) {
            throw AnalysisError("power balance: grid must be positive and ascending");
        }
    }
    PowerBalanceCurve curve;
    curve.vmax = vmax_grid;
    for (double v : vmax_grid) {
        curve.p_pos.push_back(0.5 * gain * v * v);
        curve.p_neg.push_back(negative_power(gain, steepness, v, points));
    }
    auto gap = [&](double v) { return 0.5 * gain * v * v - negative_power(gain, steepness, v, points); };
    std::size_t bracket = vmax_grid.size();
    for (std::size_t i = 0; i + 1 < vmax_grid.size(); ++i) {
        const double g0 = curve.p_pos[i] - curve.p_neg[i];
        const double g1 = curve.p_pos[i + 1] - curve.p_neg[i + 1];
        if (g0 < 0.0 && g1 >= 0.0) {
            bracket = i;
            break;
        }
    }
    if (bracket == vmax_grid.size()) {
        throw AnalysisError("no oscillation point in range");
    }
    double lo = vmax_grid[bracket];
    double hi = vmax_grid[bracket + 1];
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    curve.intersection_vmax = 0.5 * (lo + hi);

    // Slopes in the V^2 coordinate by central differences.
    const double u = curve.intersection_vmax * curve.intersection_vmax;
    const double du = 1e-4 * u;
    auto p_neg_u = [&](double uu) { return negative_power(gain, steepness, std::sqrt(uu), points); };
    curve.slope_pos = 0.5 * gain;
    curve.slope_neg = (p_neg_u(u + du) - p_neg_u(u - du)) / (2.0 * du);
    curve.gamma_deg = std::atan(curve.slope_pos) * 180.0 / std::numbers::pi;
    curve.theta_deg = curve.gamma_deg - std::atan(curve.slope_neg) * 180.0 / std::numbers::pi;
    return curve;
}

namespace {

void check_zeta(double zeta) {
    if (!(zeta > 0.0 && zeta < 1.0)) {
        throw AnalysisError("damping ratio must lie in (0, 1)");
    }
}

} // namespace

double ql1(double zeta) {
    check_zeta(zeta);
    return std::sqrt(1.0 - zeta * zeta) / (2.0 * zeta);
}

double ql2(double zeta) {
    check_zeta(zeta);
    return 1.0 / -std::expm1(-4.0 * std::numbers::pi * zeta / std::sqrt(1.0 - zeta * zeta));
}

double equivalence_gap(double zeta) {
    return std::abs(2.0 * std::numbers::pi * ql2(zeta) / ql1(zeta) - 1.0);
}

} // namespace oscq
