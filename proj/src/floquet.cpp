#include "oscq/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oscq/eigen_qr.hpp"
#include "oscq/errors.hpp"

namespace oscq {

const char* to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Finite: return "Finite";
    case Verdict::Infinite: return "Infinite";
    case Verdict::Unstable: return "Unstable";
    default: return "NotOscillating";
    }
}

double q_from_lambda2(double lambda2_modulus) {
    if (lambda2_modulus <= 0.0) {
        return 0.0;
    }
    return std::log(0.05) / std::log(lambda2_modulus);
}

QReport q_factor(const std::vector<Complex>& multipliers, double unit_tol,
                 std::optional<double> period) {
    if (multipliers.empty()) {
        throw Error("q_factor: empty spectrum");
    }
    if (!(unit_tol > 0.0)) {
        throw Error("q_factor: unit tolerance must be positive");
    }
    std::vector<Complex> sorted = multipliers;
    sort_spectrum(sorted);

    QReport report;
    if (period) {
        for (const Complex& lambda : sorted) {
            report.floquet_exponents.push_back(
                lambda == Complex(0.0, 0.0)
                    ? Complex(-std::numeric_limits<double>::infinity(), 0.0)
                    : std::log(lambda) / *period);
        }
    }

    auto is_unit = [&](const Complex& l) { return std::abs(std::abs(l) - 1.0) <= unit_tol; };
    report.n_unit = static_cast<int>(std::count_if(sorted.begin(), sorted.end(), is_unit));
    if (report.n_unit == 0) {
        report.verdict = Verdict::NotOscillating;
        report.lambda2 = sorted.front();
        report.lambda2_modulus = std::abs(sorted.front());
        return report;
    }

    std::size_t phase = sorted.size();
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (is_unit(sorted[k]) &&
            (phase == sorted.size() || std::abs(sorted[k] - 1.0) < std::abs(sorted[phase] - 1.0))) {
            phase = k;
        }
    }
    std::vector<Complex> rest;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (k != phase) {
            rest.push_back(sorted[k]);
        }
    }
    report.lambda2 = rest.empty() ? Complex(0.0, 0.0) : rest.front();
    report.lambda2_modulus = std::abs(report.lambda2);

    const bool exploding = std::any_of(rest.begin(), rest.end(), [&](const Complex& l) {
        return std::abs(l) > 1.0 + unit_tol;
    });
    if (exploding) {
        report.verdict = Verdict::Unstable;
    } else if (report.n_unit >= 2) {
        report.verdict = Verdict::Infinite;
    } else {
        report.verdict = Verdict::Finite;
        report.q_value = q_from_lambda2(report.lambda2_modulus);
    }
    return report;
}

Matrix fundamental_matrix(const DaeSystem& model, const PeriodicSteadyState& pss) {
    const int n = model.size();
    const auto tables = static_cast<std::size_t>(pss.steps) + 1;
    if (pss.steps <= 0 || pss.c_table.size() != tables || pss.g_table.size() != tables) {
        throw Error("fundamental_matrix: periodic steady state has no Jacobian tables");
    }
    if (pss.c_table.front().rows() != n) {
        throw Error("fundamental_matrix: Jacobian tables do not match the model dimension");
    }
    const double h = pss.step();
    const double theta = implicit_weight(pss.method);
    Matrix x = Matrix::Identity(n, n);
    for (int m = 0; m < pss.steps; ++m) {
        const Matrix lhs = pss.c_table[m + 1] / h + theta * pss.g_table[m + 1];
        const Matrix rhs = pss.c_table[m] / h - (1.0 - theta) * pss.g_table[m];
        DenseLu lu(lhs);
        if (lu.singular()) {
            throw SingularMatrixError(model.id() + ": singular step matrix while propagating X(t)",
                                      m + 1);
        }
        x = lu.solve(Matrix(rhs * x));
    }
    return x;
}

MonodromyResult analyze_monodromy(const DaeSystem& model, const PeriodicSteadyState& pss,
                                  double unit_tol) {
    MonodromyResult result;
    result.xT = fundamental_matrix(model, pss);
    result.multipliers = eigen_spectrum(result.xT);
    result.unit_tol = unit_tol;
    result.period = pss.period;
    result.q_report = q_factor(result.multipliers, unit_tol, pss.period);
    result.n_unit = result.q_report.n_unit;
    result.lambda2 = result.q_report.lambda2;
    return result;
}

namespace {

Complex lambda2_from_spectrum(const Matrix& xT) {
    const std::vector<Complex> spectrum = eigen_spectrum(xT);
    if (spectrum.size() < 2) {
        return {0.0, 0.0};
    }
    std::size_t phase = 0;
    for (std::size_t k = 1; k < spectrum.size(); ++k) {
        if (std::abs(spectrum[k] - 1.0) < std::abs(spectrum[phase] - 1.0)) {
            phase = k;
        }
    }
    return spectrum[phase == 0 ? 1 : 0];
}

PowerEstimate fall_back(const Matrix& xT, PowerEstimate est, const std::string& why) {
    est.warnings.push_back(why + "; using the full spectrum");
    est.fell_back = true;
    est.lambda2 = lambda2_from_spectrum(xT);
    return est;
}

} // namespace

PowerEstimate lambda2_power(const Matrix& xT, const Vector& phase_vector) {
    const Eigen::Index n = xT.rows();
    if (xT.cols() != n || phase_vector.size() != n) {
        throw Error("lambda2_power: dimension mismatch");
    }
    PowerEstimate est;
    if (n == 1) {
        return est;
    }
    const double vnorm = phase_vector.norm();
    if (!(vnorm > 0.0)) {
        throw Error("lambda2_power: phase vector must be non-zero");
    }
    const Vector v = phase_vector / vnorm;

    Matrix projector;
    try {
        projector = phase_projector(xT, v);
    } catch (const Error&) {
        return fall_back(xT, est, "phase vector has no left-eigenvector overlap");
    }
    const Matrix deflated = projector * xT;

    const Eigen::Index k = std::min<Eigen::Index>(n - 1, 4);
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix basis(n, k);
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        basis.data()[i] = unit(rng);
    }
    basis = projector * basis;

    std::vector<Complex> ritz;
    Complex previous(std::numeric_limits<double>::quiet_NaN(), 0.0);
    int stable = 0;
    const int max_iter = 5000;
    for (est.iterations = 1; est.iterations <= max_iter; ++est.iterations) {
        Eigen::HouseholderQR<Matrix> qr(deflated * basis);
        basis = qr.householderQ() * Matrix::Identity(n, k);
        const Matrix small = basis.transpose() * deflated * basis;
        ritz = eigen_spectrum(small);
        const Complex top = ritz.front();
        const double tol = 1e-14 * std::max(std::abs(top), 1e-300);
        stable = std::abs(top - previous) <= tol ? stable + 1 : 0;
        previous = top;
        if (stable >= 2 || (k == n - 1 && est.iterations >= 3)) {
            break;
        }
    }
    if (est.iterations > max_iter) {
        return fall_back(xT, est, "block power iteration did not settle");
    }
    est.lambda2 = ritz.front();

    std::size_t next = 1;
    if (ritz.size() > 1 && ritz.front().imag() != 0.0 &&
        std::abs(ritz[1] - std::conj(ritz.front())) <= 1e-10 * std::abs(ritz.front())) {
        next = 2;
    }
    if (next < ritz.size()) {
        const double m2 = std::abs(est.lambda2);
        est.separated = std::abs(ritz[next]) <= 0.95 * m2;
    }
    if (!est.separated) {
        return fall_back(xT, est, "|lambda2| and |lambda3| are within 5%");
    }
    return est;
}

Matrix phase_projector(const Matrix& xT, const Vector& phase_vector) {
    const Eigen::Index n = xT.rows();
    const Vector v = phase_vector.normalized();
    const Matrix shifted = xT.transpose() - (1.0 + 1e-9) * Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(shifted);
    Vector w = v;
    for (int iter = 0; iter < 6; ++iter) {
        Vector next = lu.solve(w);
        const double norm = next.norm();
        if (!(norm > 0.0) || !next.allFinite()) {
            break;
        }
        w = next / norm;
    }
    const double overlap = w.dot(v);
    if (std::abs(overlap) < 1e-12) {
        throw Error("phase_projector: left eigenvector at 1 is orthogonal to the phase vector");
    }
    return Matrix::Identity(n, n) - v * w.transpose() / overlap;
}

double alignment_angle_deg(const Matrix& xT, const Vector& v) {
    const Vector image = xT * v;
    const double denom = image.norm() * v.norm();
    if (!(denom > 0.0)) {
        return 180.0;
    }
    const double c = std::clamp(image.dot(v) / denom, -1.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

} // namespace oscq
