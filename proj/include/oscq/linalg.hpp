#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oscq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Dense LU with partial pivoting plus a cheap singularity test.
///
/// Eigen's PartialPivLU never reports singularity, so the smallest pivot
/// relative to the largest entry of the matrix is checked explicitly.
class DenseLu {
public:
    explicit DenseLu(const Matrix& a);

    bool singular() const { return singular_; }
    /// |min pivot| / max|a_ij|; zero for an exactly singular matrix.
    double pivot_ratio() const { return pivot_ratio_; }

    Vector solve(const Vector& b) const { return lu_.solve(b); }
    Matrix solve(const Matrix& b) const { return lu_.solve(b); }

private:
    Eigen::PartialPivLU<Matrix> lu_;
    double pivot_ratio_ = 0.0;
    bool singular_ = true;
};

/// 2-norm condition number via SVD (small matrices only).
double condition_number(const Matrix& a);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

} // namespace oscq
