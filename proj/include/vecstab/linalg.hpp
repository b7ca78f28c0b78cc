// Dense linear algebra for the small problems that show up in the stability
// analysis: a row-major dynamic matrix, a cyclic Jacobi solver for symmetric
// 3x3 matrices, and a general real eigenvalue solver (balancing, Householder
// Hessenberg reduction, Francis double-shift QR).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "vecstab/error.hpp"
#include "vecstab/so3.hpp"

namespace vecstab {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& data() const { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void set_block(std::size_t r0, std::size_t c0, const Mat3& b) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Mat3 block3(std::size_t r0, std::size_t c0) const {
    Mat3 b;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double norm_fro() const {
    double s = 0.0;
    for (double e : data_) s += e * e;
    return std::sqrt(s);
  }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix to_matrix(const Mat3& m) {
  Matrix r(3, 3);
  r.set_block(0, 0, m);
  return r;
}

/// Eigen-decomposition of a symmetric 3x3 matrix. Values ascending; vectors
/// orthonormal, each with its first non-negligible component positive.
struct SymmetricEigen3 {
  std::array<double, 3> values{};
  std::array<Vec3, 3> vectors{};
  int sweeps = 0;
};

inline Vec3 canonical_sign(Vec3 v, double tol = 1e-12) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::fabs(v[i]) > tol) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

/// Cyclic Jacobi sweeps until the off-diagonal mass falls below
/// `tol` times the Frobenius norm.
inline SymmetricEigen3 symmetric_eigen3(const Mat3& input, double tol = 1e-12, int max_sweeps = 64) {
  Mat3 a = input;
  // Symmetrize against round-off in the caller.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  Mat3 v = Mat3::identity();
  const double scale = std::max(norm_fro(a), std::numeric_limits<double>::min());

  auto off = [&] {
    return std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off() > tol * scale; ++sweep) {
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < 3; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off() > tol * scale) throw ConvergenceError("symmetric Jacobi iteration did not converge");

  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen3 out;
  out.sweeps = sweep;
  for (std::size_t k = 0; k < 3; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors[k] = canonical_sign(v.col(order[k]));
  }
  return out;
}

namespace detail {

/// Diagonal similarity scaling by powers of two (Parlett-Reinsch).
inline void balance(Matrix& a) {
  const std::size_t n = a.rows();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::fabs(a(j, i));
        r += std::fabs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double gi = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= gi;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

/// Householder reduction to upper Hessenberg form (in place).
inline void hessenberg(Matrix& a) {
  const std::size_t n = a.rows();
  if (n < 3) return;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += a(i, k) * a(i, k);
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const double alpha = a(k + 1, k) > 0.0 ? -xnorm : xnorm;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm += v[i] * v[i];
    }
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= 2.0 * s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= 2.0 * s * v[j];
    }
    a(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Eigenvalues only.
inline std::vector<std::complex<double>> hessenberg_qr(Matrix h, int max_iterations) {
  const int n = static_cast<int>(h.rows());
  std::vector<std::complex<double>> eig(static_cast<std::size_t>(n));
  // 1-based accessor keeps the index arithmetic of the classic formulation.
  auto a = [&h](int i, int j) -> double& { return h(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)); };
  auto put = [&eig](int i, double re, double im) { eig[static_cast<std::size_t>(i - 1)] = {re, im}; };
  constexpr double eps = std::numeric_limits<double>::epsilon();

  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::fabs(a(i, j));

  int nn = n;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::fabs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        put(nn, x + t, 0.0);
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            const double lo = (z != 0.0) ? x - w / z : x + z;
            put(nn - 1, x + z, 0.0);
            put(nn, lo, 0.0);
          } else {
            put(nn - 1, x + p, z);
            put(nn, x + p, -z);
          }
          nn -= 2;
        } else {
          if (its == max_iterations) throw ConvergenceError("QR iteration cap reached in dense eigensolver");
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            const double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) + std::fabs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::fabs(p) + std::fabs(q) + std::fabs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (nn >= 1 && l < nn - 1);
  }
  return eig;
}

}  // namespace detail

/// Full spectrum of a real square matrix, sorted by ascending real part then
/// imaginary part. Throws ConvergenceError after the iteration cap.
inline std::vector<std::complex<double>> eigenvalues_dense(const Matrix& m, int max_iterations_per_eigenvalue = 100) {
  if (m.rows() != m.cols()) throw ConfigError("eigenvalues_dense: matrix must be square");
  if (m.rows() > 64) throw ConfigError("eigenvalues_dense: dimension exceeds 64");
  for (double e : m.data())
    if (!std::isfinite(e)) throw ConfigError("eigenvalues_dense: non-finite matrix entry");
  if (m.rows() == 0) return {};
  Matrix h = m;
  detail::balance(h);
  detail::hessenberg(h);
  auto eig = detail::hessenberg_qr(std::move(h), max_iterations_per_eigenvalue);
  std::sort(eig.begin(), eig.end(), [](const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return eig;
}

/// ‖A z − λ z‖ / ‖z‖ for an approximate eigenvector z obtained by inverse
/// iteration at the shift λ.
inline double eigen_residual(const Matrix& a, std::complex<double> lambda, int iterations = 3) {
  using C = std::complex<double>;
  const std::size_t n = a.rows();
  const double scale = std::max(a.norm_fro(), 1.0);
  // Perturb the shift slightly so the shifted matrix is numerically invertible.
  const C shift = lambda + C(1e-10 * scale, 0.0);
  std::vector<C> lu(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lu[i * n + j] = C(a(i, j)) - (i == j ? shift : C(0.0));
  std::vector<std::size_t> piv(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu[i * n + k]) > std::abs(lu[p * n + k])) p = i;
    piv[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[p * n + j]);
    if (std::abs(lu[k * n + k]) == 0.0) lu[k * n + k] = C(std::numeric_limits<double>::epsilon() * scale);
    for (std::size_t i = k + 1; i < n; ++i) {
      lu[i * n + k] /= lu[k * n + k];
      const C f = lu[i * n + k];
      for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
    }
  }
  std::vector<C> z(n, C(1.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) z[i] = C(1.0 + 0.1 * static_cast<double>(i % 7), 0.05 * static_cast<double>(i % 3));
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t k = 0; k < n; ++k)
      if (piv[k] != k) std::swap(z[k], z[piv[k]]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) z[i] -= lu[i * n + j] * z[j];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) z[ii] -= lu[ii * n + j] * z[j];
      z[ii] /= lu[ii * n + ii];
    }
    double zn = 0.0;
    for (const C& e : z) zn += std::norm(e);
    zn = std::sqrt(zn);
    for (C& e : z) e /= zn;
  }
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    C s = -lambda * z[i];
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * z[j];
    res += std::norm(s);
  }
  return std::sqrt(res);
}

}  // namespace vecstab
