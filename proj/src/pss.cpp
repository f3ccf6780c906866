#include "oscq/pss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oscq/errors.hpp"

namespace oscq {

const char* to_string(PssMode mode) {
    switch (mode) {
    case PssMode::Shoot: return "shoot";
    case PssMode::Detect: return "detect";
    default: return "auto";
    }
}

PssMode parse_pss_mode(const std::string& name) {
    if (name == "auto") return PssMode::Auto;
    if (name == "shoot") return PssMode::Shoot;
    if (name == "detect") return PssMode::Detect;
    throw Error("unknown PSS mode '" + name + "' (expected auto, shoot or detect)");
}

Waveform PeriodicSteadyState::waveform(const std::string& model_id,
                                       const std::vector<std::string>& names) const {
    Waveform w;
    w.times = grid;
    w.states = samples;
    w.model_id = model_id;
    w.state_names = names;
    return w;
}

namespace {

Vector column_swing(const Matrix& states) {
    return states.colwise().maxCoeff().transpose() - states.colwise().minCoeff().transpose();
}

/// Partial implicit step of size `dt` from a stored state.
Vector partial_step(const DaeSystem& model, const Vector& x, double dt, const IntegratorConfig& cfg) {
    const Vector q = model.q(x);
    const Vector f = model.f(x);
    return implicit_step(model, x, q, f, dt, cfg, dt).x;
}

/// Locates the section hit between two stored states: linear interpolation
/// for the first guess, then regula falsi (Illinois) on partial steps so the
/// returned state lies on the discrete trajectory.
SectionCrossing refine_crossing(const DaeSystem& model, const Vector& left, double t_left, double h,
                         const Vector& right, const PhaseCondition& phase,
                         const IntegratorConfig& cfg, double scale) {
    const int j = phase.anchor_index;
    const double c = phase.anchor_value;
    double lo = 0.0;
    double hi = h;
    double g_lo = left(j) - c;
    double g_hi = right(j) - c;
    double dt = h * g_lo / (g_lo - g_hi);
    Vector x = left + (right - left) * (dt / h);
    int side = 0;
    for (int iter = 0; iter < 60; ++iter) {
        if (dt <= 0.0) {
            x = left;
        } else {
            x = partial_step(model, left, dt, cfg);
        }
        const double g = x(j) - c;
        if (std::abs(g) <= 1e-14 * scale || hi - lo <= 1e-15 * h) {
            break;
        }
        if (g < 0.0) {
            lo = dt;
            g_lo = g;
            if (side == -1) g_hi *= 0.5;
            side = -1;
        } else {
            hi = dt;
            g_hi = g;
            if (side == 1) g_lo *= 0.5;
            side = 1;
        }
        dt = lo + (hi - lo) * g_lo / (g_lo - g_hi);
    }
    return {t_left + dt, x};
}

} // namespace

std::vector<SectionCrossing> section_crossings(const DaeSystem& model, const Waveform& wave,
                                               const PhaseCondition& phase,
                                               const IntegratorConfig& cfg, double scale) {
    std::vector<SectionCrossing> out;
    const int j = phase.anchor_index;
    const double c = phase.anchor_value;
    for (Eigen::Index i = 0; i + 1 < wave.size(); ++i) {
        const double a = wave.states(i, j);
        const double b = wave.states(i + 1, j);
        if (a < c && b >= c) {
            const double h = wave.times[i + 1] - wave.times[i];
            out.push_back(refine_crossing(model, wave.state(i), wave.times[i], h, wave.state(i + 1),
                                          phase, cfg, scale));
        }
    }
    return out;
}

namespace {

Vector run_warmup(const DaeSystem& model, const Vector& x0, double warmup, double h,
                  const IntegratorConfig& cfg) {
    if (!(warmup > 0.0)) {
        return x0;
    }
    const long steps = std::max(1L, static_cast<long>(std::ceil(warmup / h)));
    return integrate_steps(model, x0, 0.0, h, steps, cfg, steps).back();
}

struct PeriodScan {
    double period = 0.0;
    Vector x_cross;
    PhaseCondition phase;
    double swing = 0.0;
    std::vector<std::string> warnings;
};

/// Swing between consecutive crossings, extrapolated with Aitken's delta-squared
/// over the last three intervals. A limit at (or below) zero means a spiral
/// into a fixed point rather than an approach to a cycle.
bool decays_to_rest(const Waveform& wave, const std::vector<SectionCrossing>& crossings) {
    if (crossings.size() < 4) {
        return false;
    }
    std::vector<double> swings;
    for (std::size_t k = crossings.size() - 4; k + 1 < crossings.size(); ++k) {
        Eigen::Index i0 = 0;
        while (i0 < wave.size() && wave.times[i0] < crossings[k].t) ++i0;
        Eigen::Index i1 = i0;
        while (i1 < wave.size() && wave.times[i1] < crossings[k + 1].t) ++i1;
        if (i1 - i0 < 2) {
            return false;
        }
        swings.push_back(column_swing(wave.states.middleRows(i0, i1 - i0)).maxCoeff());
    }
    const double d1 = swings[1] - swings[0];
    const double d2 = swings[2] - swings[1];
    if (!(d1 < 0.0 && d2 < 0.0) || d2 <= d1) {
        return false;
    }
    const double limit = swings[2] - d2 * d2 / (d2 - d1);
    return limit < 1e-2 * swings[2];
}

/// Period estimate from a transient window started at `x_start`.
PeriodScan scan_period(const DaeSystem& model, const Vector& x_start,
                       std::optional<PhaseCondition> section, double period_hint,
                       const PssOptions& opts) {
    const double h = period_hint / opts.steps_per_cycle;
    double window = opts.detect_window_periods * period_hint;
    Vector x = x_start;
    for (int attempt = 0; attempt < 4; ++attempt, window *= 2.0) {
        const long steps = static_cast<long>(std::ceil(window / h));
        Waveform wave = integrate_steps(model, x, 0.0, h, steps, opts.integrator);
        const Vector swing = column_swing(wave.states);
        const double level = std::max(wave.states.cwiseAbs().maxCoeff(), 1e-300);
        if (swing.maxCoeff() <= 1e-8 * level) {
            throw PssError(PssError::Kind::NoOscillation,
                           model.id() + ": no oscillation detected (trajectory settles to a constant)");
        }
        PhaseCondition phase = section.value_or(auto_phase(wave));
        if (phase.anchor_index < 0 || phase.anchor_index >= model.size()) {
            throw Error("section component out of range");
        }
        const auto crossings = section_crossings(model, wave, phase, opts.integrator, swing.maxCoeff());
        if (crossings.size() >= 3) {
            if (decays_to_rest(wave, crossings)) {
                throw PssError(PssError::Kind::NoOscillation,
                               model.id() + ": no oscillation detected (amplitude decays toward an "
                                            "equilibrium)");
            }
            PeriodScan scan;
            scan.phase = phase;
            scan.swing = swing.maxCoeff();
            const std::size_t last = crossings.size() - 1;
            scan.period = crossings[last].t - crossings[last - 1].t;
            scan.x_cross = crossings[last - 1].x;
            double worst = 0.0;
            for (std::size_t k = 2; k < crossings.size(); ++k) {
                const double a = crossings[k].t - crossings[k - 1].t;
                const double b = crossings[k - 1].t - crossings[k - 2].t;
                worst = std::max(worst, std::abs(a - b) / scan.period);
            }
            if (worst > opts.drift_tol) {
                std::ostringstream os;
                os << "period drifting: successive crossing intervals differ by " << worst * 100.0
                   << "%";
                scan.warnings.push_back(os.str());
            }
            return scan;
        }
        x = wave.back();
    }
    throw PssError(PssError::Kind::NoOscillation,
                   model.id() + ": no oscillation detected (fewer than two section crossings)");
}

struct Propagation {
    Vector x_end;
    Matrix sensitivity; // d x_N / d x_0
    Vector period_sensitivity; // d x_N / d T
    Vector swing;
};

/// One period on the discrete scheme together with the exact derivatives of
/// the discrete map.
Propagation propagate(const DaeSystem& model, const Vector& x0, double period, int steps,
                      const IntegratorConfig& cfg) {
    const int n = model.size();
    const double h = period / steps;
    const double theta = implicit_weight(cfg.method);

    Propagation p;
    p.sensitivity = Matrix::Identity(n, n);
    p.period_sensitivity = Vector::Zero(n);
    Vector x = x0;
    Vector q = model.q(x);
    Vector f = model.f(x);
    Matrix c_prev = model.dq(x);
    Matrix g_prev = model.df(x);
    Vector lo = x;
    Vector hi = x;
    for (int m = 1; m <= steps; ++m) {
        StepResult r = implicit_step(model, x, q, f, h, cfg, m * h, m);
        const Matrix c_next = model.dq(r.x);
        const Matrix g_next = model.df(r.x);
        DenseLu lu(c_next + h * theta * g_next);
        if (lu.singular()) {
            throw SingularMatrixError(model.id() + ": singular propagation matrix", m);
        }
        const Matrix rhs = c_prev - h * (1.0 - theta) * g_prev;
        const Vector dh_term = (theta * r.f + (1.0 - theta) * f) / static_cast<double>(steps);
        p.sensitivity = lu.solve(Matrix(rhs * p.sensitivity));
        p.period_sensitivity = lu.solve(Vector(rhs * p.period_sensitivity - dh_term));
        x = std::move(r.x);
        q = std::move(r.q);
        f = std::move(r.f);
        c_prev = c_next;
        g_prev = g_next;
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    p.x_end = x;
    p.swing = hi - lo;
    return p;
}

} // namespace

PhaseCondition auto_phase(const Waveform& wave) {
    if (wave.size() < 2) {
        throw Error("auto_phase: waveform too short");
    }
    const Vector swing = column_swing(wave.states);
    Eigen::Index j = 0;
    swing.maxCoeff(&j);
    PhaseCondition phase;
    phase.anchor_index = static_cast<int>(j);
    phase.anchor_value = wave.states.col(j).mean();
    return phase;
}

PeriodicSteadyState tabulate_orbit(const DaeSystem& model, const Vector& x0, double period,
                                   int steps, const IntegratorConfig& integrator) {
    if (!(period > 0.0) || steps <= 0) {
        throw Error("tabulate_orbit: need a positive period and step count");
    }
    const Waveform wave = integrate_steps(model, x0, 0.0, period / steps, steps, integrator);
    PeriodicSteadyState pss;
    pss.period = period;
    pss.steps = steps;
    pss.method = integrator.method;
    pss.grid = wave.times;
    pss.grid.back() = period;
    pss.samples = wave.states;
    pss.c_table.reserve(steps + 1);
    pss.g_table.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const Vector x = pss.state(i);
        Matrix c = model.dq(x);
        if (DenseLu(c).singular()) {
            throw SingularMatrixError(model.id() + ": dq/dx singular along the orbit; index >= 1 "
                                                   "DAEs are not supported",
                                      i);
        }
        pss.c_table.push_back(std::move(c));
        pss.g_table.push_back(model.df(x));
    }
    pss.orbit_scale = column_swing(pss.samples).maxCoeff();
    const double closure = (pss.state(steps) - pss.state(0)).cwiseAbs().maxCoeff();
    pss.closure_residual = closure / std::max(pss.orbit_scale, 1e-300);
    return pss;
}

PeriodicSteadyState shoot(const DaeSystem& model, const Vector& x0_guess, double period_guess,
                          const PhaseCondition& phase, const PssOptions& opts) {
    if (!(period_guess > 0.0)) {
        throw Error("shoot: period guess must be positive");
    }
    if (x0_guess.size() != model.size() || !x0_guess.allFinite()) {
        throw ModelDomainError(model.id() + ": bad initial guess", x0_guess);
    }
    const int n = model.size();
    const int j = phase.anchor_index;
    if (j < 0 || j >= n) {
        throw Error("shoot: phase anchor out of range");
    }

    Vector x0 = x0_guess;
    double period = period_guess;
    double initial_scale = -1.0;
    double closure = 0.0;
    int iter = 0;
    bool converged = false;
    for (; iter <= opts.max_shoot_iter; ++iter) {
        const Propagation p = propagate(model, x0, period, opts.steps_per_cycle, opts.integrator);
        const double scale = std::max(p.swing.maxCoeff(), 1e-300);
        if (initial_scale < 0.0) {
            initial_scale = std::max(scale, x0_guess.cwiseAbs().maxCoeff());
        }
        const Vector mismatch = p.x_end - x0;
        const double anchor_gap = x0(j) - phase.anchor_value;
        closure = mismatch.cwiseAbs().maxCoeff() / scale;
        const bool done = closure <= opts.closure_tol && std::abs(anchor_gap) <= opts.closure_tol * scale;
        if (done && iter > 0) {
            converged = true;
            break;
        }

        Matrix jac = Matrix::Zero(n + 1, n + 1);
        jac.topLeftCorner(n, n) = p.sensitivity - Matrix::Identity(n, n);
        jac.topRightCorner(n, 1) = p.period_sensitivity;
        jac(n, j) = 1.0;
        // Unknowns and equations scaled to orbit units before judging conditioning.
        Vector unit = p.swing.cwiseMax(1e-3 * scale);
        Vector col_scale(n + 1);
        col_scale << unit, period;
        Vector row_scale(n + 1);
        row_scale << unit, unit(j);
        const Matrix scaled = row_scale.cwiseInverse().asDiagonal() * jac * col_scale.asDiagonal();
        const double cond = condition_number(scaled);
        if (!(cond <= opts.degenerate_cond)) {
            std::ostringstream os;
            os << model.id() << ": shooting Jacobian near-singular (condition " << cond
               << "); conservative or degenerate orbit, use period detection";
            throw PssError(PssError::Kind::Degenerate, os.str());
        }
        if (done) {
            converged = true;
            break;
        }

        Vector rhs(n + 1);
        rhs << -mismatch, -anchor_gap;
        Vector delta = jac.fullPivLu().solve(rhs);
        // Keep the update inside the orbit's neighbourhood.
        double damp = 1.0;
        if (std::abs(delta(n)) > 0.2 * period) {
            damp = std::min(damp, 0.2 * period / std::abs(delta(n)));
        }
        const double rel = (delta.head(n).array() / unit.array()).abs().maxCoeff();
        if (rel > 0.5) {
            damp = std::min(damp, 0.5 / rel);
        }
        x0 += damp * delta.head(n);
        period += damp * delta(n);
        if (!x0.allFinite() || !(period > 0.0)) {
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << model.id() << ": shooting Newton did not converge (last closure residual " << closure
           << ")";
        throw PssError(PssError::Kind::Diverged, os.str());
    }

    PeriodicSteadyState pss = tabulate_orbit(model, x0, period, opts.steps_per_cycle, opts.integrator);
    if (pss.orbit_scale <= 1e-6 * initial_scale) {
        throw PssError(PssError::Kind::ConstantSolution,
                       model.id() + ": shooting converged to a constant solution");
    }
    pss.phase = phase;
    pss.mode = "shoot";
    pss.iterations = iter;
    return pss;
}

PeriodicSteadyState polish_orbit(const DaeSystem& model, const Vector& x0_guess,
                                 double period_guess, const PhaseCondition& phase,
                                 const PssOptions& opts) {
    const int n = model.size();
    const int j = phase.anchor_index;
    Vector x0 = x0_guess;
    double period = period_guess;
    double best = std::numeric_limits<double>::infinity();
    Vector best_x = x0;
    double best_t = period;
    int stalled = 0;
    for (int iter = 0; iter <= opts.max_shoot_iter; ++iter) {
        const Propagation p = propagate(model, x0, period, opts.steps_per_cycle, opts.integrator);
        const double scale = std::max(p.swing.maxCoeff(), 1e-300);
        const Vector mismatch = p.x_end - x0;
        const double anchor_gap = x0(j) - phase.anchor_value;
        const double closure = std::max(mismatch.cwiseAbs().maxCoeff(), std::abs(anchor_gap)) / scale;
        if (closure < best) {
            stalled = closure > 0.5 * best ? stalled + 1 : 0;
            best = closure;
            best_x = x0;
            best_t = period;
        } else {
            ++stalled;
        }
        if (best <= opts.polish_tol || stalled >= 3) {
            break;
        }
        Matrix jac = Matrix::Zero(n + 1, n + 1);
        jac.topLeftCorner(n, n) = p.sensitivity - Matrix::Identity(n, n);
        jac.topRightCorner(n, 1) = p.period_sensitivity;
        jac(n, j) = 1.0;
        Vector unit = p.swing.cwiseMax(1e-3 * scale);
        Vector col_scale(n + 1);
        col_scale << unit, period;
        Vector row_scale(n + 1);
        row_scale << unit, unit(j);
        const Matrix scaled = row_scale.cwiseInverse().asDiagonal() * jac * col_scale.asDiagonal();
        Vector rhs(n + 1);
        rhs << -mismatch, -anchor_gap;
        // Minimum-norm step: directions along the orbit family are left alone.
        Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-10);
        const Vector delta = col_scale.asDiagonal() * svd.solve(Vector(row_scale.cwiseInverse().asDiagonal() * rhs));
        x0 += delta.head(n);
        period += delta(n);
        if (!x0.allFinite() || !(period > 0.0)) {
            break;
        }
    }
    return tabulate_orbit(model, best_x, best_t, opts.steps_per_cycle, opts.integrator);
}

namespace {

PeriodicSteadyState finish_detection(const DaeSystem& model, const PeriodScan& scan,
                                     const PssOptions& opts) {
    PeriodicSteadyState pss =
        tabulate_orbit(model, scan.x_cross, scan.period, opts.steps_per_cycle, opts.integrator);
    pss.phase = scan.phase;
    pss.mode = "detect";
    pss.warnings = scan.warnings;
    if (pss.closure_residual > opts.detect_closure_tol) {
        std::ostringstream os;
        os << "closure residual " << pss.closure_residual << " exceeds detection tolerance "
           << opts.detect_closure_tol;
        pss.warnings.push_back(os.str());
    }
    return pss;
}

} // namespace

PeriodicSteadyState detect_period(const DaeSystem& model, const Vector& x0, double warmup,
                                  std::optional<PhaseCondition> section, double period_hint,
                                  const PssOptions& opts) {
    if (!(period_hint > 0.0)) {
        throw Error("detect_period: period hint must be positive");
    }
    const double h = period_hint / opts.steps_per_cycle;
    const Vector start = run_warmup(model, x0, warmup, h, opts.integrator);
    return finish_detection(model, scan_period(model, start, section, period_hint, opts), opts);
}

PeriodicSteadyState find_pss(const DaeSystem& model, const Vector& seed, double period_hint,
                             const PssOptions& opts, PssMode mode) {
    if (!(period_hint > 0.0)) {
        throw Error("find_pss: period hint must be positive");
    }
    const double h = period_hint / opts.steps_per_cycle;
    const Vector start = run_warmup(model, seed, opts.warmup_periods * period_hint, h, opts.integrator);
    const PeriodScan scan = scan_period(model, start, std::nullopt, period_hint, opts);
    if (mode == PssMode::Detect) {
        return finish_detection(model, scan, opts);
    }
    try {
        PeriodicSteadyState pss = shoot(model, scan.x_cross, scan.period, scan.phase, opts);
        pss.warnings.insert(pss.warnings.end(), scan.warnings.begin(), scan.warnings.end());
        return pss;
    } catch (const PssError& e) {
        if (mode == PssMode::Auto && e.kind() == PssError::Kind::Degenerate) {
            PeriodicSteadyState pss = finish_detection(model, scan, opts);
            if (opts.polish_degenerate) {
                PeriodicSteadyState polished =
                    polish_orbit(model, pss.x0(), pss.period, pss.phase, opts);
                if (polished.closure_residual < pss.closure_residual) {
                    polished.phase = pss.phase;
                    polished.mode = "detect+polish";
                    polished.warnings = pss.warnings;
                    pss = std::move(polished);
                }
            }
            pss.warnings.insert(pss.warnings.begin(), std::string("shooting skipped: ") + e.what());
            return pss;
        }
        throw;
    }
}

} // namespace oscq
