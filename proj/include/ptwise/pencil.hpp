// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_PENCIL_HPP
#define PTWISE_PENCIL_HPP

#include <complex>
#include <vector>
#include <Eigen/Dense>

namespace ptwise
{

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Scalar polynomial phi(g) = sum_j c_j g^j, used for reparametrizations lambda = phi(gamma).
class ScalarPoly
{
public:
  ScalarPoly() = default;
  explicit ScalarPoly(std::vector<Complex> coeffs);

  const std::vector<Complex> &coeffs() const { return c; }
  // Degree after dropping trailing zeros; -1 for the zero polynomial.
  int degree() const;
  Complex operator()(Complex z) const;
  ScalarPoly derivative() const;

private:
  std::vector<Complex> c;
};

enum class StorageHint
{
  Dense,
  SparseBlock
};

// Polynomial family sum_l C_l (lambda - base)^l. Coefficients beyond order() are zero.
// Rectangular shapes are allowed so that basis series share the type.
class MatrixPencil
{
public:
  MatrixPencil() = default;
  MatrixPencil(Complex base, std::vector<CMatrix> coeffs,
               StorageHint hint = StorageHint::Dense);
  static MatrixPencil Constant(const CMatrix &c, Complex base = 0.0);

  Complex BasePoint() const { return base; }
  int Order() const { return static_cast<int>(c.size()) - 1; }
  Eigen::Index Rows() const { return c.front().rows(); }
  Eigen::Index Cols() const { return c.front().cols(); }
  bool IsSquare() const { return Rows() == Cols(); }
  StorageHint Hint() const { return hint; }

  const CMatrix &Coeff(int l) const { return c[l]; }
  const std::vector<CMatrix> &Coeffs() const { return c; }

  MatrixPencil &operator+=(const MatrixPencil &other);

private:
  Complex base = 0.0;
  std::vector<CMatrix> c;
  StorageHint hint = StorageHint::Dense;
};

MatrixPencil operator+(MatrixPencil a, const MatrixPencil &b);

// Horner evaluation at lambda.
CMatrix Eval(const MatrixPencil &p, Complex lambda);

// d/dlambda evaluated at lambda.
CMatrix EvalDerivative(const MatrixPencil &p, Complex lambda);

// Re-expands the pencil about base + s; evaluation is unchanged.
MatrixPencil Shift(const MatrixPencil &p, Complex s);

// Same as Shift but the new base point is given directly.
MatrixPencil ShiftTo(const MatrixPencil &p, Complex new_base);

// Pencil of gamma -> p(phi(gamma)) about gamma = 0, truncated at order m_out.
MatrixPencil Reparametrize(const MatrixPencil &p, const ScalarPoly &phi, int m_out);

MatrixPencil Truncate(const MatrixPencil &p, int m);

// Binomial coefficient as double, exact for n <= 64.
double Binomial(int n, int k);

}  // namespace ptwise

#endif  // PTWISE_PENCIL_HPP
