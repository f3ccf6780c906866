#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscq/dae.hpp"
#include "oscq/linalg.hpp"
#include "oscq/pss.hpp"

namespace oscq {

enum class Verdict { Finite, Infinite, Unstable, NotOscillating };
const char* to_string(Verdict verdict);

/// Q = ln(0.05) / ln|lambda2|: cycles for the slowest decaying amplitude
/// mode to fall to 5% of its initial size.
struct QReport {
    Verdict verdict = Verdict::NotOscillating;
    std::optional<double> q_value; // present iff Finite
    double lambda2_modulus = 0.0;
    Complex lambda2{0.0, 0.0};
    int n_unit = 0;
    std::vector<Complex> floquet_exponents; // ln(lambda_k)/T, principal branch
};

struct MonodromyResult {
    Matrix xT;
    std::vector<Complex> multipliers; // descending modulus
    double unit_tol = 1e-4;
    int n_unit = 0;
    Complex lambda2{0.0, 0.0};
    double period = 0.0;
    QReport q_report;
};

/// Q for a given |lambda2|; 0 for lambda2 = 0.
double q_from_lambda2(double lambda2_modulus);

/// Classifies a spectrum. The unit multiplier closest to 1 is treated as
/// the phase mode and excluded; lambda2 is the largest remaining modulus.
/// An exploding mode (|lambda| > 1 + unit_tol) wins over a second unit
/// multiplier.
QReport q_factor(const std::vector<Complex>& multipliers, double unit_tol = 1e-4,
                 std::optional<double> period = std::nullopt);

/// X(T) of the linearized system by propagating X_0 = I with the same
/// one-step scheme (and the cached C/G tables) that produced the orbit.
Matrix fundamental_matrix(const DaeSystem& model, const PeriodicSteadyState& pss);

/// Spectrum and Q verdict for a periodic steady state.
MonodromyResult analyze_monodromy(const DaeSystem& model, const PeriodicSteadyState& pss,
                                  double unit_tol = 1e-4);

struct PowerEstimate {
    Complex lambda2{0.0, 0.0};
    int iterations = 0;
    bool separated = true;  // |lambda3| <= 0.95 |lambda2| (conjugate partner excluded)
    bool fell_back = false; // answer taken from the full spectrum
    std::vector<std::string> warnings;
};

/// lambda2 without a full eigen-decomposition: the phase direction is
/// deflated with the spectral projector built from `phase_vector` and the
/// left eigenvector at multiplier 1 (inverse iteration on X^T), then a small
/// block power iteration with Rayleigh-Ritz extraction runs on the rest.
PowerEstimate lambda2_power(const Matrix& xT, const Vector& phase_vector);

/// Spectral projector I - v w^T / (w^T v) that removes the multiplier-1
/// (phase) component; w is the left eigenvector at 1 from inverse iteration.
Matrix phase_projector(const Matrix& xT, const Vector& phase_vector);

/// Angle in degrees between X v and v.
double alignment_angle_deg(const Matrix& xT, const Vector& v);

} // namespace oscq
