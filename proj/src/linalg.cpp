#include "oscq/linalg.hpp"

#include <cmath>

namespace oscq {

namespace {
constexpr double kSingularPivotRatio = 1e-14;
}

DenseLu::DenseLu(const Matrix& a) {
    const double scale = a.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        return;
    }
    lu_.compute(a);
    const Matrix& packed = lu_.matrixLU();
    double min_pivot = std::abs(packed(0, 0));
    for (Eigen::Index i = 1; i < packed.rows(); ++i) {
        min_pivot = std::min(min_pivot, std::abs(packed(i, i)));
    }
    pivot_ratio_ = min_pivot / scale;
    singular_ = !(pivot_ratio_ > kSingularPivotRatio);
}

double condition_number(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (smin == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / smin;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace oscq
