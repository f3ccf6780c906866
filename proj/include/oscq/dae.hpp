#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oscq/linalg.hpp"

namespace oscq {

/// Ordered name -> value map with per-model defaults.
///
/// Overrides may only touch names that already exist, and every value must be
/// finite.
class ParameterSet {
public:
    ParameterSet() = default;
    ParameterSet(std::initializer_list<std::pair<std::string, double>> entries);

    double get(std::string_view name) const;
    bool contains(std::string_view name) const;
    const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

    /// Copy with the given values replaced. Throws ParameterError on an
    /// unknown name or a non-finite value.
    ParameterSet with(const std::vector<std::pair<std::string, double>>& overrides) const;

private:
    std::vector<std::pair<std::string, double>> entries_;
};

/// Parses "name=value" into a pair; throws ParameterError when malformed.
std::pair<std::string, double> parse_assignment(std::string_view text);

enum class JacobianMode { Analytic, FiniteDifference };

/// Axis-aligned box used for random Jacobian checks.
struct SamplingBox {
    Vector lower;
    Vector upper;
};

using VectorFn = std::function<Vector(const Vector&)>;
using MatrixFn = std::function<Matrix(const Vector&)>;

/// Raw ingredients of an oscillator model d/dt q(x) + f(x) = 0.
struct DaeDefinition {
    std::string id;
    std::vector<std::string> state_names;
    ParameterSet params;
    VectorFn q;
    VectorFn f;
    MatrixFn dq; // empty -> central finite differences
    MatrixFn df; // empty -> central finite differences
    std::function<void(const Vector&)> domain_check; // optional, throws ModelDomainError
    SamplingBox sampling_box;
};

struct Jacobians {
    Matrix c; // dq/dx
    Matrix g; // df/dx
};

/// Immutable oscillator model. Cheap to copy; safe to share between threads.
class DaeSystem {
public:
    explicit DaeSystem(DaeDefinition def);

    int size() const { return n_; }
    const std::string& id() const { return def_.id; }
    const std::vector<std::string>& state_names() const { return def_.state_names; }
    const ParameterSet& params() const { return def_.params; }
    const SamplingBox& sampling_box() const { return def_.sampling_box; }
    JacobianMode jacobian_mode() const { return mode_; }

    Vector q(const Vector& x) const;
    Vector f(const Vector& x) const;
    Matrix dq(const Vector& x) const;
    Matrix df(const Vector& x) const;
    Jacobians jacobians(const Vector& x) const { return {dq(x), df(x)}; }

    /// Central-difference Jacobians regardless of jacobian_mode().
    Matrix dq_fd(const Vector& x) const;
    Matrix df_fd(const Vector& x) const;

    /// dx/dt = -C(x)^{-1} f(x). Throws SingularMatrixError for singular C.
    Vector velocity(const Vector& x) const;

    /// Same model with the analytic Jacobians dropped.
    DaeSystem with_fd_jacobians() const;

private:
    void check_state(const Vector& x) const;
    Matrix central_difference(const VectorFn& fn, const Vector& x, const char* what) const;

    DaeDefinition def_;
    int n_ = 0;
    JacobianMode mode_ = JacobianMode::FiniteDifference;
};

/// Step used for the j-th component by the central-difference Jacobians.
double fd_step(double xj);

struct JacobianCheckReport {
    double max_rel_error = 0.0;
    Vector worst_state;
    int samples = 0;
};

/// Worst relative deviation between the analytic and central-difference
/// Jacobians over `samples` states drawn uniformly from the model's box.
/// Deterministic for a given seed.
JacobianCheckReport fd_jacobian_check(const DaeSystem& model, int samples, std::uint64_t seed);

} // namespace oscq
