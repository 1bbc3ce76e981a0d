#pragma once

// Small dense matrices plus the symplectic toolkit: the canonical form J,
// algebra/group membership defects, the Cayley transform and an LU solver.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dampsym {

using Vector = std::vector<double>;

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization hit a pivot below the conditioning threshold.
class SingularMatrixError : public std::runtime_error {
public:
  SingularMatrixError(const std::string& what, double pivot, std::size_t column)
      : std::runtime_error(what), pivot_(pivot), column_(column) {}

  /// Magnitude of the offending pivot (after partial pivoting).
  double pivot() const noexcept { return pivot_; }
  std::size_t column() const noexcept { return column_; }

private:
  double pivot_;
  std::size_t column_;
};

/// Dense row-major real matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  Vector column(std::size_t j) const;
  std::vector<Vector> to_rows() const;

  Matrix transpose() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  /// Copies `block` into this matrix with its top-left corner at (r0, c0).
  void set_block(std::size_t r0, std::size_t c0, const Matrix& block);
  Matrix block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);
double max_abs(std::span<const double> x);

/// LU factorization with partial (row) pivoting, PA = LU.
class LuFactorization {
public:
  /// Relative pivot threshold: a pivot with |u_kk| <= kPivotTolerance * max|A|
  /// is treated as singular.
  static constexpr double kPivotTolerance = 1e-14;

  explicit LuFactorization(const Matrix& a);

  std::size_t size() const noexcept { return lu_.rows(); }
  /// Smallest pivot magnitude encountered, a cheap conditioning indicator.
  double min_pivot() const noexcept { return min_pivot_; }

  Vector solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;

private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  double min_pivot_ = 0.0;
};

Vector solve_linear(const Matrix& a, std::span<const double> b);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
Vector symmetric_eigenvalues(const Matrix& s);

/// The canonical symplectic form for n degrees of freedom, ordered z = [q, p]:
/// J = [[O, I], [-I, O]].
class SymplecticForm {
public:
  explicit SymplecticForm(std::size_t n);

  std::size_t dof() const noexcept { return n_; }
  std::size_t dim() const noexcept { return 2 * n_; }
  const Matrix& matrix() const noexcept { return j_; }
  /// J^{-1} = J^T = -J.
  Matrix inverse() const { return j_.transpose(); }

private:
  std::size_t n_;
  Matrix j_;
};

SymplecticForm make_form(std::size_t n);

/// ||J B + B^T J||_F. Zero iff B lies in the Lie algebra sp(2n).
double infinitesimal_symplectic_defect(const Matrix& b, const SymplecticForm& j);

/// ||F^T J F - J||_F. Zero iff F lies in the group Sp(2n).
double symplectic_defect(const Matrix& f, const SymplecticForm& j);

/// (I - B)^{-1} (I + B). Maps sp(2n) into Sp(2n).
/// Throws SingularMatrixError when I - B is singular.
Matrix cayley(const Matrix& b);

/// ||M J M^T - N J N^T||_F. Vanishes iff M^{-1} N is symplectic; the inverse
/// is never formed.
double quotient_symplectic_defect(const Matrix& m, const Matrix& n, const SymplecticForm& j);

/// Default membership tolerance for the defect tests above.
inline constexpr double kSymplecticTolerance = 1e-10;

}  // namespace dampsym
