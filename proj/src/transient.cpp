#include "oscq/transient.hpp"

#include <cmath>
#include <sstream>

#include "oscq/errors.hpp"

namespace oscq {

double implicit_weight(Method method) {
    return method == Method::BackwardEuler ? 1.0 : 0.5;
}

const char* to_string(Method method) {
    return method == Method::BackwardEuler ? "backward-euler" : "trapezoidal";
}

Method parse_method(const std::string& name) {
    if (name == "be" || name == "backward-euler") {
        return Method::BackwardEuler;
    }
    if (name == "trap" || name == "trapezoidal") {
        return Method::Trapezoidal;
    }
    throw Error("unknown integration method '" + name + "'");
}

IntegratorConfig IntegratorConfig::per_cycle(double period, int steps, Method method) {
    IntegratorConfig cfg;
    cfg.method = method;
    cfg.step = period / steps;
    return cfg;
}

void IntegratorConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw Error("integrator step must be positive");
    }
    if (!(newton_tol > 0.0)) {
        throw Error("newton tolerance must be positive");
    }
    if (newton_max_iter <= 0) {
        throw Error("newton iteration limit must be positive");
    }
}

StepResult implicit_step(const DaeSystem& model, const Vector& x_prev, const Vector& q_prev,
                         const Vector& f_prev, double h, const IntegratorConfig& cfg,
                         double t_next, long step_index) {
    const double theta = implicit_weight(cfg.method);
    const Vector explicit_part = q_prev - h * (1.0 - theta) * f_prev;
    const double q_scale = std::max(q_prev.cwiseAbs().maxCoeff(), 1e-300);

    StepResult out;
    out.x = x_prev;
    for (int iter = 0; iter <= cfg.newton_max_iter; ++iter) {
        out.q = model.q(out.x);
        out.f = model.f(out.x);
        const Vector residual = out.q - explicit_part + h * theta * out.f;
        const double scale = std::max(q_scale, out.q.cwiseAbs().maxCoeff());
        out.residual = residual.cwiseAbs().maxCoeff() / scale;
        out.iterations = iter;
        if (out.residual <= cfg.newton_tol) {
            return out;
        }
        if (iter == cfg.newton_max_iter) {
            break;
        }
        const Matrix jac = model.dq(out.x) + h * theta * model.df(out.x);
        DenseLu lu(jac);
        if (lu.singular()) {
            std::ostringstream os;
            os << model.id() << ": singular Newton matrix at t=" << t_next
               << " (dq/dx degenerate or step too large)";
            throw SingularMatrixError(os.str(), step_index);
        }
        out.x -= lu.solve(residual);
        if (!out.x.allFinite()) {
            break;
        }
    }
    std::ostringstream os;
    os << model.id() << ": Newton failed to converge at t=" << t_next << " (residual "
       << out.residual << ")";
    throw StepFailure(os.str(), t_next, out.x);
}

Waveform integrate_steps(const DaeSystem& model, const Vector& x0, double t0, double h, long steps,
                         const IntegratorConfig& cfg, long stride) {
    if (steps <= 0 || !(h > 0.0)) {
        throw Error("integrate: need a positive step count and step size");
    }
    IntegratorConfig local = cfg;
    local.step = h;
    local.validate();
    stride = std::max(stride, 1L);

    const long kept = steps / stride + 1 + (steps % stride != 0 ? 1 : 0);
    Waveform wave;
    wave.model_id = model.id();
    wave.state_names = model.state_names();
    wave.times.reserve(static_cast<std::size_t>(kept));
    wave.states.resize(kept, model.size());

    Vector x = x0;
    Vector q = model.q(x);
    Vector f = model.f(x);
    Eigen::Index row = 0;
    wave.times.push_back(t0);
    wave.states.row(row++) = x.transpose();
    for (long m = 1; m <= steps; ++m) {
        const double t = t0 + static_cast<double>(m) * h;
        StepResult r = implicit_step(model, x, q, f, h, local, t, m);
        x = std::move(r.x);
        q = std::move(r.q);
        f = std::move(r.f);
        if (m % stride == 0 || m == steps) {
            wave.times.push_back(t);
            wave.states.row(row++) = x.transpose();
        }
    }
    wave.states.conservativeResize(row, Eigen::NoChange);
    return wave;
}

Waveform integrate(const DaeSystem& model, const Vector& x0, double t0, double t1,
                   const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0)) {
        throw Error("integrate: t1 must exceed t0");
    }
    const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / cfg.step - 1e-9)));
    return integrate_steps(model, x0, t0, (t1 - t0) / static_cast<double>(steps), steps, cfg);
}

} // namespace oscq
