#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace steercost {

using cplx = std::complex<double>;

/// Dense row-major complex matrix.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMat(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw Error(ErrorKind::DimensionMismatch, "entry count does not match shape");
  }
  CMat(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static CMat zeros(std::size_t r, std::size_t c) { return CMat(r, c); }
  static CMat zeros(std::size_t n) { return CMat(n, n); }
  static CMat identity(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static CMat diag(std::span<const double> d) {
    CMat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  /// |v><v| for a column vector given as a span.
  static CMat outer(std::span<const cplx> v) {
    CMat m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  CMat adjoint() const {
    CMat r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }
  CMat transpose() const {
    CMat r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }
  CMat conj() const {
    CMat r = *this;
    for (auto& z : r.data_) z = std::conj(z);
    return r;
  }
  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }
  std::vector<cplx> column(std::size_t j) const {
    std::vector<cplx> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  double norm_fro() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  CMat& operator+=(const CMat& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  CMat& operator-=(const CMat& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  CMat& operator*=(cplx s) {
    for (auto& z : data_) z *= s;
    return *this;
  }
  /// this += s * o, without a temporary.
  CMat& axpy(cplx s, const CMat& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
    return *this;
  }

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator-(CMat a) { return a *= -1.0; }
  friend CMat operator*(CMat a, cplx s) { return a *= s; }
  friend CMat operator*(cplx s, CMat a) { return a *= s; }
  friend CMat operator*(CMat a, double s) { return a *= s; }
  friend CMat operator*(double s, CMat a) { return a *= s; }
  friend CMat operator/(CMat a, double s) { return a *= 1.0 / s; }
  friend CMat operator*(const CMat& a, const CMat& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product shapes");
    CMat r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }
  friend bool operator==(const CMat&, const CMat&) = default;

 private:
  void check_same_shape(const CMat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorKind::DimensionMismatch, "shape mismatch in elementwise op");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Spectral decomposition of a Hermitian matrix; eigenvalues descending.
struct HermEig {
  std::vector<double> eigenvalues;
  CMat eigenvectors;
};

inline void require_square(const CMat& m) {
  if (!m.square()) throw Error(ErrorKind::NotSquare, "matrix is not square");
}

/// Largest |m - m^dagger| entry.
inline double hermiticity_defect(const CMat& m) {
  require_square(m);
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
  return d;
}

inline void require_hermitian(const CMat& m, double tol = Tolerances::hermiticity) {
  require_square(m);
  if (hermiticity_defect(m) > tol) throw Error(ErrorKind::NotHermitian, "matrix is not Hermitian");
}

inline CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

/// Real part of tr(a b) without forming the product.
inline double trace_product_re(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw Error(ErrorKind::DimensionMismatch, "trace product shapes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) s += (a(i, k) * b(k, i)).real();
  return s;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

inline std::vector<cplx> kron(std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<cplx> r;
  r.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) r.push_back(x * y);
  return r;
}

/// Cyclic complex Jacobi eigensolver. Input must be Hermitian to 1e-10.
///
/// Each rotation first removes the phase of the pivot, then applies the
/// classical real symmetric rotation. Sweeps run in fixed (p, q) order so
/// identical inputs give bit-identical output.
inline HermEig herm_eig(const CMat& m) {
  require_hermitian(m);
  const std::size_t n = m.rows();
  CMat a = hermitian_part(m);
  CMat v = CMat::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += std::norm(a(p, q));
    return std::sqrt(2.0 * s);
  };
  const double scale = std::max(a.norm_fro(), 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_norm() <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r <= 1e-300 || r <= 1e-17 * scale) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const cplx phase = a(p, q) / r;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // G = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q).
        const cplx gpp = c, gpq = s;
        const cplx gqp = -s * std::conj(phase), gqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // a <- a G
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // a <- G^dagger a
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {  // v <- v G
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });
  HermEig out{std::vector<double>(n), CMat(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]).real();
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, c) = v(k, order[c]);
  }
  return out;
}

inline std::vector<double> eigenvalues(const CMat& m) { return herm_eig(m).eigenvalues; }

inline double min_eigenvalue(const CMat& m) { return herm_eig(m).eigenvalues.back(); }
inline double max_eigenvalue(const CMat& m) { return herm_eig(m).eigenvalues.front(); }

/// V diag(f(lambda)) V^dagger.
template <typename F>
CMat spectral_map(const HermEig& e, F&& f) {
  const std::size_t n = e.eigenvalues.size();
  CMat r(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const double w = f(e.eigenvalues[c]);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vi = w * e.eigenvectors(i, c);
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vi * std::conj(e.eigenvectors(j, c));
    }
  }
  return r;
}

inline CMat reconstruct(const HermEig& e) {
  return spectral_map(e, [](double l) { return l; });
}

inline double trace_norm(const CMat& m) {
  double s = 0.0;
  for (double l : eigenvalues(m)) s += std::abs(l);
  return s;
}

inline double trace_distance(const CMat& r, const CMat& s) {
  if (r.rows() != s.rows() || r.cols() != s.cols())
    throw Error(ErrorKind::DimensionMismatch, "trace_distance operands differ in shape");
  return 0.5 * trace_norm(r - s);
}

/// tr_A of an operator on C^dA (x) C^dB.
inline CMat partial_trace_A(const CMat& m, std::size_t dA, std::size_t dB) {
  if (m.rows() != dA * dB || m.cols() != dA * dB)
    throw Error(ErrorKind::DimensionMismatch, "partial_trace_A: operator is not (dA*dB)x(dA*dB)");
  CMat r(dB, dB);
  for (std::size_t a = 0; a < dA; ++a)
    for (std::size_t i = 0; i < dB; ++i)
      for (std::size_t j = 0; j < dB; ++j) r(i, j) += m(a * dB + i, a * dB + j);
  return r;
}

inline CMat partial_trace_B(const CMat& m, std::size_t dA, std::size_t dB) {
  if (m.rows() != dA * dB || m.cols() != dA * dB)
    throw Error(ErrorKind::DimensionMismatch, "partial_trace_B: operator is not (dA*dB)x(dA*dB)");
  CMat r(dA, dA);
  for (std::size_t i = 0; i < dA; ++i)
    for (std::size_t j = 0; j < dA; ++j)
      for (std::size_t b = 0; b < dB; ++b) r(i, j) += m(i * dB + b, j * dB + b);
  return r;
}

/// Projection onto the PSD cone in Frobenius norm.
inline CMat psd_project(const CMat& m) {
  const HermEig e = herm_eig(m);
  if (e.eigenvalues.empty() || e.eigenvalues.back() >= 0.0) return hermitian_part(m);
  return spectral_map(e, [](double l) { return l > 0.0 ? l : 0.0; });
}

inline bool is_psd(const CMat& m, double slack = Tolerances::psd_slack) {
  return hermiticity_defect(m) <= Tolerances::hermiticity && min_eigenvalue(m) >= -slack;
}

namespace pauli {
inline CMat I() { return CMat::identity(2); }
inline CMat X() { return CMat{{0.0, 1.0}, {1.0, 0.0}}; }
inline CMat Y() { return CMat{{0.0, cplx(0, -1)}, {cplx(0, 1), 0.0}}; }
inline CMat Z() { return CMat{{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

}  // namespace steercost
