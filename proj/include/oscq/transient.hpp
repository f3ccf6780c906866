#pragma once

#include <string>
#include <vector>

#include "oscq/dae.hpp"
#include "oscq/linalg.hpp"

namespace oscq {

enum class Method { BackwardEuler, Trapezoidal };

/// Weight on f(x_{m+1}) in the one-step scheme: 1 for BE, 1/2 for trapezoidal.
double implicit_weight(Method method);

const char* to_string(Method method);
Method parse_method(const std::string& name);

struct IntegratorConfig {
    Method method = Method::Trapezoidal;
    double step = 0.0;          // fixed step; must be > 0
    double newton_tol = 1e-10;  // max-norm of h*residual relative to |q|
    int newton_max_iter = 20;

    /// Step chosen so that `steps` steps cover exactly one `period`.
    static IntegratorConfig per_cycle(double period, int steps, Method method = Method::Trapezoidal);
    void validate() const;
};

/// Sampled trajectory: one row of `states` per entry of `times`.
struct Waveform {
    std::vector<double> times;
    Matrix states;
    std::string model_id;
    std::vector<std::string> state_names;

    Eigen::Index size() const { return states.rows(); }
    Vector state(Eigen::Index i) const { return states.row(i).transpose(); }
    Vector back() const { return state(size() - 1); }
};

struct StepResult {
    Vector x;
    Vector q;
    Vector f;
    int iterations = 0;
    double residual = 0.0; // scaled residual at acceptance
};

/// One implicit step from (x_prev, q_prev, f_prev):
///   q(x) - q_prev + h*(theta*f(x) + (1-theta)*f_prev) = 0,
/// solved by Newton with the matrix dq/dx + h*theta*df/dx and dense LU.
/// The initial guess is x_prev.
StepResult implicit_step(const DaeSystem& model, const Vector& x_prev, const Vector& q_prev,
                         const Vector& f_prev, double h, const IntegratorConfig& cfg,
                         double t_next, long step_index = -1);

/// Fixed-step integration over exactly `steps` steps of size `h`.
/// `stride` > 1 keeps every stride-th state (the final state is always kept).
Waveform integrate_steps(const DaeSystem& model, const Vector& x0, double t0, double h, long steps,
                         const IntegratorConfig& cfg, long stride = 1);

/// Fixed-step integration from t0 to t1. The step is shrunk slightly so that
/// an integer number of steps lands on t1.
Waveform integrate(const DaeSystem& model, const Vector& x0, double t0, double t1,
                   const IntegratorConfig& cfg);

} // namespace oscq
