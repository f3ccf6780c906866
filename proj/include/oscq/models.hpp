#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oscq/dae.hpp"
#include "oscq/pss.hpp"

namespace oscq {

// Golden ratio; the ideal comparator ring has multipliers {1, phi^-6, phi^-12}
// and period 6*tau*ln(phi).
inline constexpr double kGoldenRatio = 1.6180339887498948482;

/// Three-stage ring, v_i' = (-tanh(s*v_{i-1}) - v_i) / tau (cyclic).
DaeSystem build_ring(double tau = 1.0, double steepness = 100.0);

/// Negative-resistance LC tank:
///   C v' = -i_L - K (v - tanh(a v)),   L i_L' = v.
DaeSystem build_lc(double inductance = 0.5e-9, double capacitance = 0.5e-9, double gain = 1.0,
                   double steepness = 1.01);

enum class StnoForm { Cartesian, Spherical };

/// Landau-Lifshitz-Gilbert macrospin with spin-transfer torque:
///   tau M' = -M x H - alpha M x (M x H) - alpha M x (M x I_s),
///   H = diag(Kx, Ky, Kz) M + H_ext.
/// Parameters: tau, alpha, Kx, Ky, Kz, Is_x, Is_y, Is_z, Hext_x, Hext_y, Hext_z.
/// The spherical form uses (theta, phi) with the polar axis along +x:
///   M = (cos theta, sin theta cos phi, sin theta sin phi).
DaeSystem build_stno(StnoForm form, const ParameterSet& params);
ParameterSet stno_default_params();

/// Cyclic mass-action kinetics A+B->2B, B+C->2C, C+A->2A with rate k.
DaeSystem build_chemical(double rate = 1.0);

/// Scalar q = x, f = x / tau. Exact solution x0 * exp(-t / tau).
DaeSystem build_linear_decay(double tau = 1.0);

/// Registry entry: defaults, seed state for warmup and analytic knowledge.
struct ModelSpec {
    std::string name;
    std::string summary;
    ParameterSet defaults;
    std::function<DaeSystem(const ParameterSet&)> build;
    std::function<Vector(const ParameterSet&)> seed;
    std::function<double(const ParameterSet&)> period_hint;
    /// Throws ParameterError for an initial state the model cannot start from.
    std::function<void(const Vector&)> check_initial_state = [](const Vector&) {};
    /// Known reference values (name -> value) at the given parameters, if any.
    std::function<std::vector<std::pair<std::string, double>>(const ParameterSet&)> oracle =
        [](const ParameterSet&) { return std::vector<std::pair<std::string, double>>{}; };
};

const std::vector<ModelSpec>& model_registry();
const ModelSpec& find_model(const std::string& name);

} // namespace oscq
