#include "oscq/dae.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oscq/errors.hpp"

namespace oscq {

ParameterSet::ParameterSet(std::initializer_list<std::pair<std::string, double>> entries)
    : entries_(entries) {}

bool ParameterSet::contains(std::string_view name) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == name; });
}

double ParameterSet::get(std::string_view name) const {
    for (const auto& [key, value] : entries_) {
        if (key == name) {
            return value;
        }
    }
    throw ParameterError("unknown parameter " + std::string(name));
}

ParameterSet ParameterSet::with(const std::vector<std::pair<std::string, double>>& overrides) const {
    ParameterSet out = *this;
    for (const auto& [name, value] : overrides) {
        auto it = std::find_if(out.entries_.begin(), out.entries_.end(),
                               [&](const auto& e) { return e.first == name; });
        if (it == out.entries_.end()) {
            throw ParameterError("unknown parameter " + name);
        }
        if (!std::isfinite(value)) {
            throw ParameterError("parameter " + name + " must be finite");
        }
        it->second = value;
    }
    return out;
}

std::pair<std::string, double> parse_assignment(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size()) {
        throw ParameterError("expected name=value, got '" + std::string(text) + "'");
    }
    const std::string name(text.substr(0, eq));
    const std::string rhs(text.substr(eq + 1));
    char* end = nullptr;
    const double value = std::strtod(rhs.c_str(), &end);
    if (end != rhs.c_str() + rhs.size()) {
        throw ParameterError("bad value for " + name + ": '" + rhs + "'");
    }
    return {name, value};
}

double fd_step(double xj) { return std::max(1e-8, 1e-7 * std::abs(xj)); }

DaeSystem::DaeSystem(DaeDefinition def) : def_(std::move(def)) {
    n_ = static_cast<int>(def_.state_names.size());
    if (n_ <= 0) {
        throw Error("model " + def_.id + ": state dimension must be positive");
    }
    if (!def_.q || !def_.f) {
        throw Error("model " + def_.id + ": q and f are required");
    }
    mode_ = (def_.dq && def_.df) ? JacobianMode::Analytic : JacobianMode::FiniteDifference;
}

void DaeSystem::check_state(const Vector& x) const {
    if (x.size() != n_) {
        std::ostringstream os;
        os << def_.id << ": state has length " << x.size() << ", expected " << n_;
        throw ModelDomainError(os.str(), x);
    }
    if (!x.allFinite()) {
        throw ModelDomainError(def_.id + ": non-finite state", x);
    }
    if (def_.domain_check) {
        def_.domain_check(x);
    }
}

namespace {

template <typename T>
T checked(T value, const Vector& x, const std::string& id, const char* what) {
    if (!value.allFinite()) {
        throw ModelDomainError(id + ": non-finite " + what, x);
    }
    return value;
}

} // namespace

Vector DaeSystem::q(const Vector& x) const {
    check_state(x);
    return checked(def_.q(x), x, def_.id, "q(x)");
}

Vector DaeSystem::f(const Vector& x) const {
    check_state(x);
    return checked(def_.f(x), x, def_.id, "f(x)");
}

Matrix DaeSystem::dq(const Vector& x) const {
    if (!def_.dq) {
        return dq_fd(x);
    }
    check_state(x);
    return checked(def_.dq(x), x, def_.id, "dq/dx");
}

Matrix DaeSystem::df(const Vector& x) const {
    if (!def_.df) {
        return df_fd(x);
    }
    check_state(x);
    return checked(def_.df(x), x, def_.id, "df/dx");
}

Matrix DaeSystem::central_difference(const VectorFn& fn, const Vector& x, const char* what) const {
    check_state(x);
    Matrix jac(n_, n_);
    Vector xp = x;
    Vector xm = x;
    for (int j = 0; j < n_; ++j) {
        const double h = fd_step(x(j));
        xp(j) = x(j) + h;
        xm(j) = x(j) - h;
        jac.col(j) = (fn(xp) - fn(xm)) / (2.0 * h);
        xp(j) = x(j);
        xm(j) = x(j);
    }
    return checked(jac, x, def_.id, what);
}

Matrix DaeSystem::dq_fd(const Vector& x) const { return central_difference(def_.q, x, "dq/dx"); }
Matrix DaeSystem::df_fd(const Vector& x) const { return central_difference(def_.f, x, "df/dx"); }

Vector DaeSystem::velocity(const Vector& x) const {
    DenseLu lu(dq(x));
    if (lu.singular()) {
        throw SingularMatrixError(def_.id + ": dq/dx is singular; only index-0 models are supported", -1);
    }
    return -lu.solve(f(x));
}

DaeSystem DaeSystem::with_fd_jacobians() const {
    DaeDefinition def = def_;
    def.dq = nullptr;
    def.df = nullptr;
    return DaeSystem(std::move(def));
}

namespace {

double relative_gap(const Matrix& exact, const Matrix& approx) {
    const double scale = std::max(exact.cwiseAbs().maxCoeff(), 1e-300);
    return (exact - approx).cwiseAbs().maxCoeff() / scale;
}

} // namespace

JacobianCheckReport fd_jacobian_check(const DaeSystem& model, int samples, std::uint64_t seed) {
    const SamplingBox& box = model.sampling_box();
    if (box.lower.size() != model.size() || box.upper.size() != model.size()) {
        throw Error(model.id() + ": no sampling box declared");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    JacobianCheckReport report;
    report.samples = samples;
    Vector x(model.size());
    for (int s = 0; s < samples; ++s) {
        for (int j = 0; j < model.size(); ++j) {
            x(j) = box.lower(j) + (box.upper(j) - box.lower(j)) * unit(rng);
        }
        const double gap = std::max(relative_gap(model.dq(x), model.dq_fd(x)),
                                    relative_gap(model.df(x), model.df_fd(x)));
        if (gap >= report.max_rel_error) {
            report.max_rel_error = gap;
            report.worst_state = x;
        }
    }
    return report;
}

} // namespace oscq
