// SPDX-License-Identifier: Apache-2.0

#include "ptwise/pencil.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include "ptwise/errors.hpp"

namespace ptwise
{

ScalarPoly::ScalarPoly(std::vector<Complex> coeffs) : c(std::move(coeffs)) {}

int ScalarPoly::degree() const
{
  int d = static_cast<int>(c.size()) - 1;
  while (d >= 0 && c[d] == Complex(0.0))
  {
    d--;
  }
  return d;
}

Complex ScalarPoly::operator()(Complex z) const
{
  Complex r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it)
  {
    r = r * z + *it;
  }
  return r;
}

ScalarPoly ScalarPoly::derivative() const
{
  std::vector<Complex> d;
  for (std::size_t j = 1; j < c.size(); j++)
  {
    d.push_back(static_cast<double>(j) * c[j]);
  }
  return ScalarPoly(std::move(d));
}

MatrixPencil::MatrixPencil(Complex base, std::vector<CMatrix> coeffs, StorageHint hint)
  : base(base), c(std::move(coeffs)), hint(hint)
{
  if (c.empty())
  {
    throw DimensionMismatch("pencil needs at least one coefficient");
  }
  for (const auto &m : c)
  {
    if (m.rows() != c.front().rows() || m.cols() != c.front().cols())
    {
      throw DimensionMismatch("pencil coefficients differ in shape");
    }
  }
}

MatrixPencil MatrixPencil::Constant(const CMatrix &m, Complex base)
{
  return MatrixPencil(base, {m});
}

MatrixPencil &MatrixPencil::operator+=(const MatrixPencil &other)
{
  if (other.base != base || other.Rows() != Rows() || other.Cols() != Cols())
  {
    throw DimensionMismatch("pencil sum needs equal base point and shape");
  }
  if (other.c.size() > c.size())
  {
    c.resize(other.c.size(), CMatrix::Zero(Rows(), Cols()));
  }
  for (std::size_t l = 0; l < other.c.size(); l++)
  {
    c[l] += other.c[l];
  }
  return *this;
}

MatrixPencil operator+(MatrixPencil a, const MatrixPencil &b)
{
  a += b;
  return a;
}

CMatrix Eval(const MatrixPencil &p, Complex lambda)
{
  const Complex d = lambda - p.BasePoint();
  CMatrix r = p.Coeff(p.Order());
  for (int l = p.Order() - 1; l >= 0; l--)
  {
    r *= d;
    r += p.Coeff(l);
  }
  return r;
}

CMatrix EvalDerivative(const MatrixPencil &p, Complex lambda)
{
  const Complex d = lambda - p.BasePoint();
  CMatrix r = CMatrix::Zero(p.Rows(), p.Cols());
  for (int l = p.Order(); l >= 1; l--)
  {
    r *= d;
    r += static_cast<double>(l) * p.Coeff(l);
  }
  return r;
}

namespace
{

const std::array<std::array<std::uint64_t, 65>, 65> &PascalTable()
{
  static const auto table = []
  {
    std::array<std::array<std::uint64_t, 65>, 65> t{};
    for (int n = 0; n <= 64; n++)
    {
      t[n][0] = t[n][n] = 1;
      for (int k = 1; k < n; k++)
      {
        t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

double Binomial(int n, int k)
{
  if (k < 0 || k > n)
  {
    return 0.0;
  }
  if (n <= 64)
  {
    return static_cast<double>(PascalTable()[n][k]);
  }
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                             std::lgamma(n - k + 1.0)));
}

MatrixPencil Shift(const MatrixPencil &p, Complex s)
{
  const int m = p.Order();
  std::vector<CMatrix> out(m + 1, CMatrix::Zero(p.Rows(), p.Cols()));
  for (int j = 0; j <= m; j++)
  {
    Complex sp = 1.0;
    for (int l = j; l <= m; l++)
    {
      out[j] += (Binomial(l, j) * sp) * p.Coeff(l);
      sp *= s;
    }
  }
  return MatrixPencil(p.BasePoint() + s, std::move(out), p.Hint());
}

MatrixPencil ShiftTo(const MatrixPencil &p, Complex new_base)
{
  return Shift(p, new_base - p.BasePoint());
}

MatrixPencil Reparametrize(const MatrixPencil &p, const ScalarPoly &phi, int m_out)
{
  // Horner in the truncated polynomial ring over (phi(g) - base).
  std::vector<Complex> psi = phi.coeffs();
  if (psi.empty())
  {
    psi.push_back(0.0);
  }
  psi[0] -= p.BasePoint();
  const auto zero = CMatrix::Zero(p.Rows(), p.Cols());
  std::vector<CMatrix> r(m_out + 1, zero);
  r[0] = p.Coeff(p.Order());
  for (int l = p.Order() - 1; l >= 0; l--)
  {
    std::vector<CMatrix> next(m_out + 1, zero);
    for (int i = 0; i <= m_out; i++)
    {
      if (r[i].isZero(0.0))
      {
        continue;
      }
      for (int j = 0; j < static_cast<int>(psi.size()) && i + j <= m_out; j++)
      {
        if (psi[j] != Complex(0.0))
        {
          next[i + j] += psi[j] * r[i];
        }
      }
    }
    next[0] += p.Coeff(l);
    r = std::move(next);
  }
  return MatrixPencil(0.0, std::move(r), p.Hint());
}

MatrixPencil Truncate(const MatrixPencil &p, int m)
{
  if (m >= p.Order())
  {
    return p;
  }
  std::vector<CMatrix> c(p.Coeffs().begin(), p.Coeffs().begin() + m + 1);
  return MatrixPencil(p.BasePoint(), std::move(c), p.Hint());
}

}  // namespace ptwise
