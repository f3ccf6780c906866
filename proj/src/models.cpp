#include "oscq/models.hpp"

#include <cmath>
#include <numbers>

#include "oscq/errors.hpp"

namespace oscq {

namespace {

double sech2(double x) {
    const double c = std::cosh(x);
    return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
    Eigen::Matrix3d s;
    s << 0.0, -a(2), a(1), a(2), 0.0, -a(0), -a(1), a(0), 0.0;
    return s;
}

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ParameterError(std::string(name) + " must be positive");
    }
}

Vector box_bound(int n, double value) { return Vector::Constant(n, value); }

} // namespace

DaeSystem build_ring(double tau, double steepness) {
    require_positive(tau, "tau");
    require_positive(steepness, "s");
    DaeDefinition def;
    def.id = "ring";
    def.state_names = {"v1", "v2", "v3"};
    def.params = ParameterSet{{"tau", tau}, {"s", steepness}};
    def.q = [](const Vector& x) { return x; };
    def.f = [tau, steepness](const Vector& x) {
        Vector out(3);
        for (int i = 0; i < 3; ++i) {
            const int prev = (i + 2) % 3;
            out(i) = (x(i) + std::tanh(steepness * x(prev))) / tau;
        }
        return out;
    };
    def.dq = [](const Vector&) { return Matrix::Identity(3, 3); };
    def.df = [tau, steepness](const Vector& x) {
        Matrix g = Matrix::Identity(3, 3) / tau;
        for (int i = 0; i < 3; ++i) {
            const int prev = (i + 2) % 3;
            g(i, prev) = steepness * sech2(steepness * x(prev)) / tau;
        }
        return g;
    };
    def.sampling_box = {box_bound(3, -1.2), box_bound(3, 1.2)};
    return DaeSystem(std::move(def));
}

DaeSystem build_lc(double inductance, double capacitance, double gain, double steepness) {
    require_positive(inductance, "L");
    require_positive(capacitance, "C");
    require_positive(steepness, "a");
    if (!(gain >= 0.0) || !std::isfinite(gain)) {
        throw ParameterError("K must be non-negative");
    }
    DaeDefinition def;
    def.id = "lc";
    def.state_names = {"v", "i_L"};
    def.params = ParameterSet{{"L", inductance}, {"C", capacitance}, {"K", gain}, {"a", steepness}};
    def.q = [inductance, capacitance](const Vector& x) {
        return Vector{{capacitance * x(0), inductance * x(1)}};
    };
    def.f = [gain, steepness](const Vector& x) {
        return Vector{{x(1) + gain * (x(0) - std::tanh(steepness * x(0))), -x(0)}};
    };
    def.dq = [inductance, capacitance](const Vector&) {
        return Matrix{{capacitance, 0.0}, {0.0, inductance}};
    };
    def.df = [gain, steepness](const Vector& x) {
        return Matrix{{gain * (1.0 - steepness * sech2(steepness * x(0))), 1.0}, {-1.0, 0.0}};
    };
    def.sampling_box = {box_bound(2, -1.0), box_bound(2, 1.0)};
    return DaeSystem(std::move(def));
}

ParameterSet stno_default_params() {
    return ParameterSet{{"tau", 1e-9},   {"alpha", 0.02}, {"Kx", -10.0},   {"Ky", 0.0},
                        {"Kz", 1.0},     {"Is_x", 0.0},   {"Is_y", 0.0},   {"Is_z", -0.6},
                        {"Hext_x", 0.0}, {"Hext_y", 0.0}, {"Hext_z", 2.0}};
}

namespace {

/// Torque F(M) = M x H + alpha M x (M x H) + alpha M x (M x I_s) = -tau M'.
struct LlgField {
    double alpha;
    Eigen::Vector3d anisotropy;
    Eigen::Vector3d h_ext;
    Eigen::Vector3d spin;

    explicit LlgField(const ParameterSet& p)
        : alpha(p.get("alpha")),
          anisotropy(p.get("Kx"), p.get("Ky"), p.get("Kz")),
          h_ext(p.get("Hext_x"), p.get("Hext_y"), p.get("Hext_z")),
          spin(p.get("Is_x"), p.get("Is_y"), p.get("Is_z")) {}

    Eigen::Vector3d torque(const Eigen::Vector3d& m) const {
        const Eigen::Vector3d h = anisotropy.cwiseProduct(m) + h_ext;
        const Eigen::Vector3d mh = m.cross(h);
        return mh + alpha * m.cross(mh) + alpha * m.cross(m.cross(spin));
    }

    Eigen::Matrix3d jacobian(const Eigen::Vector3d& m) const {
        const Eigen::Vector3d h = anisotropy.cwiseProduct(m) + h_ext;
        const Eigen::Vector3d mh = m.cross(h);
        const Eigen::Vector3d ms = m.cross(spin);
        const Eigen::Matrix3d d_mh = skew(m) * anisotropy.asDiagonal() - skew(h);
        const Eigen::Matrix3d d_mmh = -skew(mh) + skew(m) * d_mh;
        const Eigen::Matrix3d d_mms = -skew(ms) - skew(m) * skew(spin);
        return d_mh + alpha * (d_mmh + d_mms);
    }
};

struct SphericalFrame {
    Eigen::Vector3d m;
    Eigen::Vector3d e_theta;
    Eigen::Vector3d e_phi;
    double sin_theta;
    double cos_theta;

    SphericalFrame(double theta, double phi) {
        sin_theta = std::sin(theta);
        cos_theta = std::cos(theta);
        const double sp = std::sin(phi);
        const double cp = std::cos(phi);
        m = {cos_theta, sin_theta * cp, sin_theta * sp};
        e_theta = {-sin_theta, cos_theta * cp, cos_theta * sp};
        e_phi = {0.0, -sp, cp};
    }
};

} // namespace

DaeSystem build_stno(StnoForm form, const ParameterSet& params) {
    const ParameterSet p = stno_default_params().with(params.entries());
    const double tau = p.get("tau");
    require_positive(tau, "tau");
    const LlgField field(p);

    DaeDefinition def;
    def.params = p;
    if (form == StnoForm::Cartesian) {
        def.id = "stno-cartesian";
        def.state_names = {"mx", "my", "mz"};
        def.q = [tau](const Vector& x) { return Vector(tau * x); };
        def.f = [field](const Vector& x) { return Vector(field.torque(x.head<3>())); };
        def.dq = [tau](const Vector&) { return Matrix(tau * Matrix::Identity(3, 3)); };
        def.df = [field](const Vector& x) { return Matrix(field.jacobian(x.head<3>())); };
        def.sampling_box = {box_bound(3, -1.0), box_bound(3, 1.0)};
        return DaeSystem(std::move(def));
    }

    def.id = "stno-spherical";
    def.state_names = {"theta", "phi"};
    def.domain_check = [](const Vector& x) {
        if (std::abs(std::sin(x(0))) < 1e-8) {
            throw ModelDomainError("stno-spherical: state at a coordinate pole (sin theta < 1e-8)", x);
        }
    };
    def.q = [tau](const Vector& x) { return Vector(tau * x); };
    def.f = [field](const Vector& x) {
        const SphericalFrame fr(x(0), x(1));
        const Eigen::Vector3d t = field.torque(fr.m);
        return Vector{{fr.e_theta.dot(t), fr.e_phi.dot(t) / fr.sin_theta}};
    };
    def.dq = [tau](const Vector&) { return Matrix(tau * Matrix::Identity(2, 2)); };
    def.df = [field](const Vector& x) {
        const SphericalFrame fr(x(0), x(1));
        const Eigen::Vector3d t = field.torque(fr.m);
        const Eigen::Matrix3d jt = field.jacobian(fr.m);
        // dM/dtheta = e_theta, dM/dphi = sin(theta) e_phi,
        // de_theta/dtheta = -M, de_theta/dphi = cos(theta) e_phi, de_phi/dphi = -(0, cos phi, sin phi).
        const Eigen::Vector3d dm_dtheta = fr.e_theta;
        const Eigen::Vector3d dm_dphi = fr.sin_theta * fr.e_phi;
        const Eigen::Vector3d de_phi_dphi(0.0, -fr.e_phi(2), fr.e_phi(1));
        Matrix g(2, 2);
        g(0, 0) = -fr.m.dot(t) + fr.e_theta.dot(jt * dm_dtheta);
        g(0, 1) = fr.cos_theta * fr.e_phi.dot(t) + fr.e_theta.dot(jt * dm_dphi);
        const double phi_torque = fr.e_phi.dot(t);
        g(1, 0) = fr.e_phi.dot(jt * dm_dtheta) / fr.sin_theta -
                  fr.cos_theta * phi_torque / (fr.sin_theta * fr.sin_theta);
        g(1, 1) = (de_phi_dphi.dot(t) + fr.e_phi.dot(jt * dm_dphi)) / fr.sin_theta;
        return g;
    };
    def.sampling_box = {Vector{{0.3, -3.0}}, Vector{{2.8, 3.0}}};
    return DaeSystem(std::move(def));
}

DaeSystem build_chemical(double rate) {
    require_positive(rate, "k");
    DaeDefinition def;
    def.id = "chemical";
    def.state_names = {"a", "b", "c"};
    def.params = ParameterSet{{"k", rate}};
    def.q = [](const Vector& x) { return x; };
    def.f = [rate](const Vector& x) {
        const double a = x(0), b = x(1), c = x(2);
        return Vector{{rate * (a * b - c * a), rate * (b * c - a * b), rate * (c * a - b * c)}};
    };
    def.dq = [](const Vector&) { return Matrix::Identity(3, 3); };
    def.df = [rate](const Vector& x) {
        const double a = x(0), b = x(1), c = x(2);
        return Matrix{{rate * (b - c), rate * a, -rate * a},
                      {-rate * b, rate * (c - a), rate * b},
                      {rate * c, -rate * c, rate * (a - b)}};
    };
    def.sampling_box = {box_bound(3, 0.05), box_bound(3, 2.0)};
    return DaeSystem(std::move(def));
}

DaeSystem build_linear_decay(double tau) {
    require_positive(tau, "tau");
    DaeDefinition def;
    def.id = "linear-decay";
    def.state_names = {"x"};
    def.params = ParameterSet{{"tau", tau}};
    def.q = [](const Vector& x) { return x; };
    def.f = [tau](const Vector& x) { return Vector(x / tau); };
    def.dq = [](const Vector&) { return Matrix::Identity(1, 1); };
    def.df = [tau](const Vector&) { return Matrix::Constant(1, 1, 1.0 / tau); };
    def.sampling_box = {box_bound(1, -2.0), box_bound(1, 2.0)};
    return DaeSystem(std::move(def));
}

namespace {

std::vector<ModelSpec> make_registry() {
    std::vector<ModelSpec> out;
    const double ln_phi = std::log(kGoldenRatio);

    ModelSpec ring;
    ring.name = "ring";
    ring.summary = "3-stage ring of smoothed inverters (-tanh(s v)) and RC delays";
    ring.defaults = ParameterSet{{"tau", 1.0}, {"s", 100.0}};
    ring.build = [](const ParameterSet& p) { return build_ring(p.get("tau"), p.get("s")); };
    ring.seed = [](const ParameterSet&) { return Vector{{0.5, -0.3, 0.1}}; };
    ring.period_hint = [ln_phi](const ParameterSet& p) { return 6.0 * ln_phi * p.get("tau"); };
    ring.oracle = [ln_phi](const ParameterSet& p) {
        return std::vector<std::pair<std::string, double>>{
            {"ideal_period", 6.0 * ln_phi * p.get("tau")},
            {"ideal_lambda2", std::pow(kGoldenRatio, -6.0)},
            {"ideal_lambda3", std::pow(kGoldenRatio, -12.0)},
            {"ideal_swing", kGoldenRatio - 1.0}};
    };
    out.push_back(ring);

    ModelSpec lc;
    lc.name = "lc";
    lc.summary = "LC tank with nonlinear conductor K (v - tanh(a v))";
    lc.defaults = ParameterSet{{"L", 0.5e-9}, {"C", 0.5e-9}, {"K", 1.0}, {"a", 1.01}};
    lc.build = [](const ParameterSet& p) {
        return build_lc(p.get("L"), p.get("C"), p.get("K"), p.get("a"));
    };
    lc.seed = [](const ParameterSet&) { return Vector{{0.2, 0.0}}; };
    lc.period_hint = [](const ParameterSet& p) {
        return 2.0 * std::numbers::pi * std::sqrt(p.get("L") * p.get("C"));
    };
    lc.oracle = [](const ParameterSet& p) {
        return std::vector<std::pair<std::string, double>>{
            {"linear_period", 2.0 * std::numbers::pi * std::sqrt(p.get("L") * p.get("C"))}};
    };
    out.push_back(lc);

    for (StnoForm form : {StnoForm::Cartesian, StnoForm::Spherical}) {
        ModelSpec stno;
        const bool cart = form == StnoForm::Cartesian;
        stno.name = cart ? "stno-cartesian" : "stno-spherical";
        stno.summary = cart ? "LLG spin-torque oscillator, magnetization M in R^3"
                            : "LLG spin-torque oscillator on the unit sphere, (theta, phi) about +x";
        stno.defaults = stno_default_params();
        stno.build = [form](const ParameterSet& p) { return build_stno(form, p); };
        stno.seed = [cart](const ParameterSet&) {
            const Eigen::Vector3d m = Eigen::Vector3d(0.1, 0.2, 0.97).normalized();
            if (cart) {
                return Vector(m);
            }
            return Vector{{std::acos(m(0)), std::atan2(m(2), m(1))}};
        };
        stno.period_hint = [](const ParameterSet& p) { return 2.0 * p.get("tau"); };
        out.push_back(stno);
    }

    ModelSpec chem;
    chem.name = "chemical";
    chem.summary = "cyclic mass-action reactions A+B->2B, B+C->2C, C+A->2A";
    chem.defaults = ParameterSet{{"k", 1.0}};
    chem.build = [](const ParameterSet& p) { return build_chemical(p.get("k")); };
    chem.seed = [](const ParameterSet&) { return Vector{{1.0, 0.3, 0.2}}; };
    chem.period_hint = [](const ParameterSet& p) { return 10.0 / p.get("k"); };
    chem.check_initial_state = [](const Vector& x) {
        if ((x.array() < 0.0).any()) {
            throw ParameterError("chemical: concentrations must be non-negative");
        }
    };
    out.push_back(chem);
    return out;
}

} // namespace

const std::vector<ModelSpec>& model_registry() {
    static const std::vector<ModelSpec> registry = make_registry();
    return registry;
}

const ModelSpec& find_model(const std::string& name) {
    for (const ModelSpec& spec : model_registry()) {
        if (spec.name == name) {
            return spec;
        }
    }
    throw Error("unknown model '" + name + "'");
}

} // namespace oscq
