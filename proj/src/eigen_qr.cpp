#include "oscq/eigen_qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oscq/errors.hpp"

namespace oscq {

Vector balance(Matrix& a) {
    const Eigen::Index n = a.rows();
    constexpr double radix = 2.0;
    constexpr double radix2 = radix * radix;
    Vector scale = Vector::Ones(n);
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j != i) {
                    c += std::abs(a(j, i));
                    r += std::abs(a(i, j));
                }
            }
            if (c == 0.0 || r == 0.0) {
                continue;
            }
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix2;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                scale(i) *= f;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
    return scale;
}

void reduce_to_hessenberg(Matrix& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        const Eigen::Index m = n - k - 1;
        Vector v = a.block(k + 1, k, m, 1);
        const double norm = v.norm();
        if (norm == 0.0) {
            continue;
        }
        const double alpha = v(0) >= 0.0 ? -norm : norm;
        v(0) -= alpha;
        const double vv = v.squaredNorm();
        if (vv == 0.0) {
            continue;
        }
        const double beta = 2.0 / vv;
        // A <- H A H with H = I - beta v v^T acting on rows/cols k+1..n-1.
        Eigen::RowVectorXd w = v.transpose() * a.bottomRows(m);
        a.bottomRows(m) -= beta * v * w;
        Vector u = a.rightCols(m) * v;
        a.rightCols(m) -= beta * u * v.transpose();
        a(k + 1, k) = alpha;
        for (Eigen::Index i = k + 2; i < n; ++i) {
            a(i, k) = 0.0;
        }
    }
}

namespace {

/// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr layout).
std::vector<Complex> hessenberg_qr(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<Complex> roots;
    roots.reserve(n);

    double anorm = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(i - 1, 0); j < n; ++j) {
            anorm += std::abs(a(i, j));
        }
    }

    const int max_sweeps = 100 * n;
    int sweeps = 0;
    int its = 0;
    double t = 0.0; // accumulated exceptional shifts
    int hi = n - 1;
    while (hi >= 0) {
        int l = hi;
        while (l > 0) {
            double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
            if (s == 0.0) {
                s = anorm;
            }
            if (std::abs(a(l, l - 1)) <= eps * s) {
                a(l, l - 1) = 0.0;
                break;
            }
            --l;
        }
        double x = a(hi, hi);
        if (l == hi) {
            roots.emplace_back(x + t, 0.0);
            --hi;
            its = 0;
            continue;
        }
        double y = a(hi - 1, hi - 1);
        double w = a(hi, hi - 1) * a(hi - 1, hi);
        if (l == hi - 1) {
            const double p = 0.5 * (y - x);
            const double q = p * p + w;
            const double z = std::sqrt(std::abs(q));
            x += t;
            if (q >= 0.0) {
                const double zz = p + std::copysign(z, p);
                const double r1 = x + zz;
                const double r2 = zz != 0.0 ? x - w / zz : r1;
                roots.emplace_back(r1, 0.0);
                roots.emplace_back(r2, 0.0);
            } else {
                roots.emplace_back(x + p, z);
                roots.emplace_back(x + p, -z);
            }
            hi -= 2;
            its = 0;
            continue;
        }
        if (sweeps >= max_sweeps) {
            throw EigenError("QR iteration failed to converge after " + std::to_string(max_sweeps) +
                             " sweeps");
        }
        if (its > 0 && its % 10 == 0) {
            // Exceptional shift to break cycles.
            t += x;
            for (int i = 0; i <= hi; ++i) {
                a(i, i) -= x;
            }
            const double s = std::abs(a(hi, hi - 1)) + std::abs(a(hi - 1, hi - 2));
            x = y = 0.75 * s;
            w = -0.4375 * s * s;
        }
        ++its;
        ++sweeps;

        // Look for two consecutive small subdiagonal elements.
        int m = hi - 2;
        double p = 0.0;
        double q = 0.0;
        double r = 0.0;
        double z = 0.0;
        for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            const double s0 = y - z;
            p = (r * s0 - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s0;
            r = a(m + 2, m + 1);
            const double s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) {
                break;
            }
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) {
                break;
            }
        }
        for (int i = m + 2; i <= hi; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) {
                a(i, i - 3) = 0.0;
            }
        }
        // Double QR step on rows l..hi and columns m..hi.
        for (int k = m; k <= hi - 1; ++k) {
            if (k != m) {
                p = a(k, k - 1);
                q = a(k + 1, k - 1);
                r = (k != hi - 1) ? a(k + 2, k - 1) : 0.0;
                x = std::abs(p) + std::abs(q) + std::abs(r);
                if (x != 0.0) {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) {
                continue;
            }
            if (k == m) {
                if (l != m) {
                    a(k, k - 1) = -a(k, k - 1);
                }
            } else {
                a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= hi; ++j) {
                double pp = a(k, j) + q * a(k + 1, j);
                if (k != hi - 1) {
                    pp += r * a(k + 2, j);
                    a(k + 2, j) -= pp * z;
                }
                a(k + 1, j) -= pp * y;
                a(k, j) -= pp * x;
            }
            const int mmin = std::min(hi, k + 3);
            for (int i = l; i <= mmin; ++i) {
                double pp = x * a(i, k) + y * a(i, k + 1);
                if (k != hi - 1) {
                    pp += z * a(i, k + 2);
                    a(i, k + 2) -= pp * r;
                }
                a(i, k + 1) -= pp * q;
                a(i, k) -= pp;
            }
        }
    }
    return roots;
}

} // namespace

void sort_spectrum(std::vector<Complex>& values) {
    std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
        const double ma = std::abs(a);
        const double mb = std::abs(b);
        if (std::abs(ma - mb) > 1e-12 * std::max(ma, mb)) {
            return ma > mb;
        }
        if (a.real() != b.real()) {
            return a.real() > b.real();
        }
        return a.imag() > b.imag();
    });
}

std::vector<Complex> eigen_spectrum(const Matrix& input) {
    if (input.rows() != input.cols() || input.rows() == 0) {
        throw Error("eigen_spectrum: matrix must be square and non-empty");
    }
    if (!input.allFinite()) {
        throw EigenError("eigen_spectrum: matrix has non-finite entries");
    }
    Matrix a = input;
    balance(a);
    reduce_to_hessenberg(a);
    std::vector<Complex> values = hessenberg_qr(a);
    sort_spectrum(values);
    return values;
}

ComplexVector eigenvector(const Matrix& a, Complex lambda) {
    const Eigen::Index n = a.rows();
    const double nudge = 1e-10 * (std::abs(lambda) + a.cwiseAbs().maxCoeff());
    const Complex shift = lambda + Complex(nudge, 0.5 * nudge);
    const ComplexMatrix shifted = a.cast<Complex>() - shift * ComplexMatrix::Identity(n, n);
    Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
    ComplexVector v = ComplexVector::Ones(n) / std::sqrt(static_cast<double>(n));
    for (int iter = 0; iter < 4; ++iter) {
        ComplexVector next = lu.solve(v);
        const double norm = next.norm();
        if (!(norm > 0.0) || !next.allFinite()) {
            break;
        }
        v = next / norm;
    }
    // Fix the arbitrary complex phase: largest component real and positive.
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::conj(v(k)) / std::abs(v(k));
    return v;
}

} // namespace oscq
