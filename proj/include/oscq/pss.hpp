#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscq/dae.hpp"
#include "oscq/linalg.hpp"
#include "oscq/transient.hpp"

namespace oscq {

/// Fixed-component anchor x[anchor_index] = anchor_value that removes the
/// time-shift freedom of a periodic orbit. Crossings are taken rising.
struct PhaseCondition {
    int anchor_index = 0;
    double anchor_value = 0.0;
};

struct PssOptions {
    IntegratorConfig integrator;       // method and Newton settings; step is derived
    int steps_per_cycle = 2000;
    double closure_tol = 1e-8;         // shooting, relative to orbit swing
    double detect_closure_tol = 1e-5;  // period detection, relative to orbit swing
    int max_shoot_iter = 40;
    double degenerate_cond = 1e12;     // shooting Jacobian condition limit
    double warmup_periods = 20.0;
    double drift_tol = 1e-3;           // relative spread of inter-crossing times
    double detect_window_periods = 12.0;
    bool polish_degenerate = true;     // minimum-norm Newton after a degenerate fallback
    double polish_tol = 1e-14;
};

enum class PssMode { Auto, Shoot, Detect };
const char* to_string(PssMode mode);
PssMode parse_pss_mode(const std::string& name);

/// Sampled periodic orbit on a uniform grid with the Jacobian tables
/// C(t_i) = dq/dx and G(t_i) = df/dx cached at every grid point.
struct PeriodicSteadyState {
    double period = 0.0;
    int steps = 0;
    Method method = Method::Trapezoidal;
    std::vector<double> grid;          // steps + 1 times, 0 .. period
    Matrix samples;                    // (steps + 1) x n
    std::vector<Matrix> c_table;
    std::vector<Matrix> g_table;
    double closure_residual = 0.0;     // |x(T) - x(0)|_inf / orbit_scale
    double orbit_scale = 0.0;          // largest per-component swing
    PhaseCondition phase;
    std::string mode;                  // "shoot" or "detect"
    int iterations = 0;
    std::vector<std::string> warnings;

    Vector x0() const { return samples.row(0).transpose(); }
    Vector state(int i) const { return samples.row(i).transpose(); }
    double step() const { return period / steps; }
    Waveform waveform(const std::string& model_id, const std::vector<std::string>& names) const;
};

struct SectionCrossing {
    double t = 0.0;
    Vector x;
};

/// Rising crossings of the section between consecutive waveform samples,
/// refined onto the discrete trajectory with partial implicit steps.
std::vector<SectionCrossing> section_crossings(const DaeSystem& model, const Waveform& wave,
                                               const PhaseCondition& phase,
                                               const IntegratorConfig& integrator, double scale);

/// Largest-swing component anchored at its time mean over the waveform.
PhaseCondition auto_phase(const Waveform& wave);

/// Integrates one period from x0 on `steps` uniform steps and caches the
/// samples and C/G tables. Throws SingularMatrixError if some C(t_i) is
/// singular.
PeriodicSteadyState tabulate_orbit(const DaeSystem& model, const Vector& x0, double period,
                                   int steps, const IntegratorConfig& integrator);

/// Newton shooting on (x0, T) with the phase anchor. The monodromy block and
/// the period sensitivity come from differentiating the discrete scheme.
PeriodicSteadyState shoot(const DaeSystem& model, const Vector& x0_guess, double period_guess,
                          const PhaseCondition& phase, const PssOptions& opts);

/// Transient past `warmup`, then period from consecutive rising crossings of
/// the section. When `section` is empty it is chosen by auto_phase on the
/// detection window.
PeriodicSteadyState detect_period(const DaeSystem& model, const Vector& x0, double warmup,
                                  std::optional<PhaseCondition> section, double period_hint,
                                  const PssOptions& opts);

/// Gauss-Newton on the shooting system with a truncated-SVD solve, so that a
/// rank-deficient Jacobian (a continuous family of orbits) still closes the
/// discrete orbit. Returns the best iterate tabulated.
PeriodicSteadyState polish_orbit(const DaeSystem& model, const Vector& x0_guess,
                                 double period_guess, const PhaseCondition& phase,
                                 const PssOptions& opts);

/// Warmup from `seed`, then shooting (Auto falls back to detection when the
/// shooting Jacobian is flagged degenerate, then polishes that orbit).
PeriodicSteadyState find_pss(const DaeSystem& model, const Vector& seed, double period_hint,
                             const PssOptions& opts, PssMode mode = PssMode::Auto);

} // namespace oscq
