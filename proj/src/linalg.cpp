#include "dampsym/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dampsym {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
        << b.cols();
    throw DimensionError(msg.str());
  }
}

void require_form_size(const Matrix& a, const SymplecticForm& j, const char* op) {
  if (!a.square() || a.rows() != j.dim()) {
    std::ostringstream msg;
    msg << op << ": expected " << j.dim() << "x" << j.dim() << " matrix, got " << a.rows() << "x"
        << a.cols();
    throw DimensionError(msg.str());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw DimensionError("Matrix::from_rows: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

std::vector<Vector> Matrix::to_rows() const {
  std::vector<Vector> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const { return norm2(data_); }

double Matrix::max_abs() const { return dampsym::max_abs(data_); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& block) {
  if (r0 + block.rows() > rows_ || c0 + block.cols() > cols_)
    throw DimensionError("Matrix::set_block: block exceeds bounds");
  for (std::size_t i = 0; i < block.rows(); ++i)
    for (std::size_t j = 0; j < block.cols(); ++j) (*this)(r0 + i, c0 + j) = block(i, j);
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
  if (r0 + rows > rows_ || c0 + cols > cols_)
    throw DimensionError("Matrix::block: block exceeds bounds");
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("operator*: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("operator*: matrix/vector size mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

// --- LU --------------------------------------------------------------------

LuFactorization::LuFactorization(const Matrix& a) : lu_(a), perm_(a.rows()) {
  if (!a.square()) throw DimensionError("LuFactorization: matrix must be square");
  if (!a.all_finite()) throw std::invalid_argument("LuFactorization: non-finite entry");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double threshold = kPivotTolerance * a.max_abs();
  min_pivot_ = n == 0 ? 0.0 : std::abs(a(0, 0));

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;

    const double pivot = std::abs(lu_(piv, k));
    min_pivot_ = k == 0 ? pivot : std::min(min_pivot_, pivot);
    if (pivot <= threshold || pivot == 0.0) {
      std::ostringstream msg;
      msg << "singular matrix: pivot " << pivot << " in column " << k << " (threshold "
          << threshold << ")";
      throw SingularMatrixError(msg.str(), pivot, k);
    }
    if (piv != k) {
      std::swap(perm_[k], perm_[piv]);
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu_(i, k) / lu_(k, k);
      lu_(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
    }
  }
}

Vector LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = size();
  if (b.size() != n) throw DimensionError("LuFactorization::solve: rhs length mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Matrix LuFactorization::solve(const Matrix& b) const {
  if (b.rows() != size()) throw DimensionError("LuFactorization::solve: rhs rows mismatch");
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vector col = solve(b.column(j));
    for (std::size_t i = 0; i < col.size(); ++i) x(i, j) = col[i];
  }
  return x;
}

Vector solve_linear(const Matrix& a, std::span<const double> b) {
  return LuFactorization(a).solve(b);
}

// --- Jacobi ----------------------------------------------------------------

Vector symmetric_eigenvalues(const Matrix& s) {
  if (!s.square()) throw DimensionError("symmetric_eigenvalues: matrix must be square");
  Matrix a = s;
  const std::size_t n = a.rows();
  const double scale = std::max(a.frobenius_norm(), 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-16 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// --- symplectic structure --------------------------------------------------

SymplecticForm::SymplecticForm(std::size_t n) : n_(n), j_(2 * n, 2 * n) {
  if (n == 0) throw std::invalid_argument("SymplecticForm: dimension must be at least 1");
  for (std::size_t i = 0; i < n; ++i) {
    j_(i, n + i) = 1.0;
    j_(n + i, i) = -1.0;
  }
}

SymplecticForm make_form(std::size_t n) { return SymplecticForm(n); }

double infinitesimal_symplectic_defect(const Matrix& b, const SymplecticForm& j) {
  require_form_size(b, j, "infinitesimal_symplectic_defect");
  const Matrix& jm = j.matrix();
  return (jm * b + b.transpose() * jm).frobenius_norm();
}

double symplectic_defect(const Matrix& f, const SymplecticForm& j) {
  require_form_size(f, j, "symplectic_defect");
  const Matrix& jm = j.matrix();
  return (f.transpose() * jm * f - jm).frobenius_norm();
}

Matrix cayley(const Matrix& b) {
  if (!b.square()) throw DimensionError("cayley: matrix must be square");
  const Matrix id = Matrix::identity(b.rows());
  Matrix out = LuFactorization(id - b).solve(id + b);
  if (!out.all_finite()) throw SingularMatrixError("cayley: non-finite result", 0.0, 0);
  return out;
}

double quotient_symplectic_defect(const Matrix& m, const Matrix& n, const SymplecticForm& j) {
  require_form_size(m, j, "quotient_symplectic_defect");
  require_form_size(n, j, "quotient_symplectic_defect");
  const Matrix& jm = j.matrix();
  return (m * jm * m.transpose() - n * jm * n.transpose()).frobenius_norm();
}

}  // namespace dampsym
