// SPDX-License-Identifier: Apache-2.0

#include "ptwise/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <Eigen/Eigenvalues>
#include "ptwise/errors.hpp"

namespace ptwise
{

namespace
{

// Swaps the adjacent diagonal entries i, i+1 of the triangular t by a Givens rotation and
// accumulates it into q.
void SwapAdjacent(CMatrix &t, CMatrix &q, Eigen::Index i)
{
  const Complex t11 = t(i, i), t22 = t(i + 1, i + 1);
  const Complex f = t(i, i + 1), g = t22 - t11;
  const double af = std::abs(f), ag = std::abs(g);
  if (ag == 0.0)
  {
    return;
  }
  double c;
  Complex s;
  if (af == 0.0)
  {
    c = 0.0;
    s = std::conj(g) / ag;
  }
  else
  {
    const double r = std::hypot(af, ag);
    c = af / r;
    s = (f / af) * std::conj(g) / r;
  }
  // G = [c s; -conj(s) c]; t <- G t G^*, q <- q G^*.
  Eigen::Matrix2cd gm;
  gm << c, s, -std::conj(s), c;
  t.middleRows(i, 2) = gm * t.middleRows(i, 2);
  t.middleCols(i, 2) = t.middleCols(i, 2) * gm.adjoint();
  q.middleCols(i, 2) = q.middleCols(i, 2) * gm.adjoint();
  t(i, i) = t22;
  t(i + 1, i + 1) = t11;
  t(i + 1, i) = 0.0;
}

void SortTriangular(CMatrix &t, CMatrix &q, bool ascending)
{
  const Eigen::Index n = t.rows();
  auto key = [&](Eigen::Index i) { return ascending ? -t(i, i).real() : t(i, i).real(); };
  for (Eigen::Index pass = 0; pass < n; pass++)
  {
    bool swapped = false;
    for (Eigen::Index i = 0; i + 1 < n - pass; i++)
    {
      if (key(i + 1) > key(i))
      {
        SwapAdjacent(t, q, i);
        swapped = true;
      }
    }
    if (!swapped)
    {
      break;
    }
  }
}

CMatrix StrictUpper(const CMatrix &t)
{
  CMatrix r = t.triangularView<Eigen::Upper>();
  return r;
}

}  // namespace

double GapTolerance(const CMatrix &a)
{
  return 1e-8 * (1.0 + a.norm());
}

SortedSchur SortSchur(const CMatrix &a, int split, bool ascending)
{
  const Eigen::Index n = a.rows();
  if (a.cols() != n || split < 0 || split > n)
  {
    throw DimensionMismatch("SortSchur needs a square matrix and 0 <= split <= n");
  }
  SortedSchur s;
  s.split = split;
  if (n == 1)
  {
    s.q = CMatrix::Identity(1, 1);
    s.t = a;
  }
  else
  {
    Eigen::ComplexSchur<CMatrix> cs(a, true);
    s.q = cs.matrixU();
    s.t = StrictUpper(cs.matrixT());
    SortTriangular(s.t, s.q, ascending);
  }
  s.eigenvalues = s.t.diagonal();
  if (split > 0 && split < n &&
      std::abs(s.eigenvalues(split - 1) - s.eigenvalues(split)) <= GapTolerance(a))
  {
    throw GapFailure("sorted eigenvalues " + std::to_string(split - 1) + " and " +
                     std::to_string(split) + " coincide");
  }
  return s;
}

SortedSchur AdaptedSchur(const CMatrix &a, const CMatrix &basis, bool ascending)
{
  const Eigen::Index n = a.rows(), k = basis.cols();
  Eigen::HouseholderQR<CMatrix> qr(basis);
  const CMatrix qf = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix b = qf.adjoint() * a * qf;
  CMatrix z = CMatrix::Zero(n, n);
  if (k > 0)
  {
    z.topLeftCorner(k, k) = SortSchur(b.topLeftCorner(k, k), 0, ascending).q;
  }
  if (k < n)
  {
    z.bottomRightCorner(n - k, n - k) =
        SortSchur(b.bottomRightCorner(n - k, n - k), 0, ascending).q;
  }
  SortedSchur s;
  s.q = qf * z;
  s.t = StrictUpper(s.q.adjoint() * a * s.q);
  s.eigenvalues = s.t.diagonal();
  s.split = static_cast<int>(k);
  return s;
}

Complex DefaultReferencePoint(Complex lambda0)
{
  return lambda0 + 10.0 * (1.0 + std::abs(lambda0));
}

int MorseIndex(const MatrixPencil &a, Complex lambda_ref)
{
  const CMatrix m = Eval(a, lambda_ref);
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  const double tol = GapTolerance(m);
  int count = 0;
  for (Eigen::Index i = 0; i < m.rows(); i++)
  {
    const double re = es.eigenvalues()(i).real();
    if (std::abs(re) <= tol)
    {
      throw GapFailure("spatial eigenvalue on the imaginary axis at the reference point");
    }
    count += re > 0.0 ? 1 : 0;
  }
  return count;
}

CMatrix SolveTriangularSylvester(const CMatrix &t22, const CMatrix &t11, const CMatrix &r,
                                 double tol)
{
  const Eigen::Index m = t22.rows(), k = t11.rows();
  CMatrix x(m, k);
  CVector rhs(m);
  for (Eigen::Index j = 0; j < k; j++)
  {
    rhs = r.col(j);
    for (Eigen::Index i = 0; i < j; i++)
    {
      rhs += t11(i, j) * x.col(i);
    }
    const Complex shift = t11(j, j);
    for (Eigen::Index row = m - 1; row >= 0; row--)
    {
      Complex acc = rhs(row);
      for (Eigen::Index c = row + 1; c < m; c++)
      {
        acc -= t22(row, c) * x(c, j);
      }
      const Complex piv = t22(row, row) - shift;
      if (std::abs(piv) <= tol)
      {
        throw SylvesterSingular("Sylvester equation has overlapping spectra");
      }
      x(row, j) = acc / piv;
    }
  }
  return x;
}

CMatrix SolveSylvester(const CMatrix &a, const CMatrix &b, const CMatrix &c)
{
  const SortedSchur sa = SortSchur(a, 0), sb = SortSchur(b, 0);
  const double tol = 1e-14 * (1.0 + a.norm() + b.norm());
  const CMatrix y =
      SolveTriangularSylvester(sa.t, sb.t, sa.q.adjoint() * c * sb.q, tol);
  return sa.q * y * sb.q.adjoint();
}

CMatrix SubspaceJet::Basis(Complex lambda) const
{
  const Eigen::Index n = Ambient();
  const Complex d = lambda - base;
  CMatrix hm = h.back();
  for (int l = Order() - 1; l >= 0; l--)
  {
    hm *= d;
    hm += h[l];
  }
  return frame.q.leftCols(dim) + frame.q.rightCols(n - dim) * hm;
}

SubspaceJet TaylorJet(const MatrixPencil &a, Complex lambda0, int k, int order,
                      SubspaceKind kind)
{
  const int n = static_cast<int>(a.Rows());
  const CMatrix a0 = Eval(a, lambda0);
  const SortedSchur frame = kind == SubspaceKind::Unstable ? SortSchur(a0, k, false)
                                                           : SortSchur(a0, n - k, true);
  return TaylorJet(a, lambda0, frame, order, kind);
}

SubspaceJet TaylorJet(const MatrixPencil &a, Complex lambda0, const SortedSchur &frame,
                      int order, SubspaceKind kind)
{
  const Eigen::Index n = a.Rows();
  const Eigen::Index d = frame.split, m = n - d;
  const MatrixPencil sp = ShiftTo(a, lambda0);
  const int p = sp.Order();

  std::vector<CMatrix> a00(p + 1), a01(p + 1), a10(p + 1), a11(p + 1);
  std::vector<bool> a01_zero(p + 1);
  for (int l = 0; l <= p; l++)
  {
    const CMatrix b = l == 0 ? frame.t : CMatrix(frame.q.adjoint() * sp.Coeff(l) * frame.q);
    a00[l] = b.topLeftCorner(d, d);
    a01[l] = b.topRightCorner(d, m);
    a10[l] = b.bottomLeftCorner(m, d);
    a11[l] = b.bottomRightCorner(m, m);
    a01_zero[l] = a01[l].isZero(0.0);
  }
  const double tol = GapTolerance(frame.t);

  SubspaceJet jet;
  jet.base = lambda0;
  jet.frame = frame;
  jet.dim = static_cast<int>(d);
  jet.kind = kind;
  jet.h.assign(order + 1, CMatrix::Zero(m, d));
  // g[i][j] = h[i] a01[j], cached for the quadratic term.
  std::vector<std::vector<CMatrix>> g(order + 1);
  for (int l = 1; l <= order; l++)
  {
    CMatrix r = l <= p ? CMatrix(-a10[l]) : CMatrix::Zero(m, d);
    for (int j = std::max(1, l - p); j <= l - 1; j++)
    {
      r.noalias() += jet.h[j] * a00[l - j];
      r.noalias() -= a11[l - j] * jet.h[j];
    }
    for (int j = 0; j <= std::min(p, l - 2); j++)
    {
      if (a01_zero[j])
      {
        continue;
      }
      for (int i = 1; i <= l - j - 1; i++)
      {
        r.noalias() += g[i][j] * jet.h[l - j - i];
      }
    }
    jet.h[l] = SolveTriangularSylvester(a11[0], a00[0], r, tol);
    g[l].resize(p + 1);
    for (int j = 0; j <= p; j++)
    {
      if (!a01_zero[j])
      {
        g[l][j] = jet.h[l] * a01[j];
      }
    }
  }
  return jet;
}

CMatrix HomologicalResidual(const SubspaceJet &jet, const MatrixPencil &a, Complex lambda)
{
  const Eigen::Index n = jet.Ambient(), d = jet.dim, m = n - d;
  const CMatrix b = jet.frame.q.adjoint() * Eval(a, lambda) * jet.frame.q;
  const Complex dl = lambda - jet.base;
  CMatrix hm = jet.h.back();
  for (int l = jet.Order() - 1; l >= 0; l--)
  {
    hm *= dl;
    hm += jet.h[l];
  }
  return b.bottomLeftCorner(m, d) + b.bottomRightCorner(m, m) * hm -
         hm * b.topLeftCorner(d, d) - hm * b.topRightCorner(d, m) * hm;
}

MatrixPencil BasisSeries(const SubspaceJet &jet, int m_out)
{
  const Eigen::Index n = jet.Ambient(), d = jet.dim;
  m_out = std::min(m_out, jet.Order());
  std::vector<CMatrix> c(m_out + 1);
  c[0] = jet.frame.q.leftCols(d);
  for (int l = 1; l <= m_out; l++)
  {
    c[l] = jet.frame.q.rightCols(n - d) * jet.h[l];
  }
  return MatrixPencil(jet.base, std::move(c));
}

CMatrix Orthonormalize(const CMatrix &u)
{
  Eigen::HouseholderQR<CMatrix> qr(u);
  return qr.householderQ() * CMatrix::Identity(u.rows(), u.cols());
}

double InvarianceResidual(const CMatrix &m, const CMatrix &u)
{
  const CMatrix q = Orthonormalize(u);
  const CMatrix mq = m * q;
  const double mn = m.norm();
  return (mq - q * (q.adjoint() * mq)).norm() / (mn > 0.0 ? mn : 1.0);
}

double SubspaceAngle(const CMatrix &u, const CMatrix &v)
{
  const CMatrix qu = Orthonormalize(u), qv = Orthonormalize(v);
  const CMatrix r = qu - qv * (qv.adjoint() * qu);
  Eigen::JacobiSVD<CMatrix> svd(r);
  const double s = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return std::asin(std::min(1.0, s));
}

CMatrix NewtonRefine(const MatrixPencil &a, Complex lambda, const CMatrix &u_guess,
                     const RefineOptions &opts)
{
  const CMatrix am = Eval(a, lambda);
  const Eigen::Index n = am.rows(), k = u_guess.cols(), m = n - k;
  if (k == 0 || k == n)
  {
    return Orthonormalize(u_guess);
  }
  Eigen::HouseholderQR<CMatrix> qr(u_guess);
  const CMatrix qf = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix b = qf.adjoint() * am * qf;
  const CMatrix b00 = b.topLeftCorner(k, k), b01 = b.topRightCorner(k, m);
  const CMatrix b10 = b.bottomLeftCorner(m, k), b11 = b.bottomRightCorner(m, m);
  const double anorm = std::max(am.norm(), 1e-300);

  CMatrix hm = CMatrix::Zero(m, k);
  for (int it = 0; it <= opts.max_newton; it++)
  {
    const CMatrix res = b10 + b11 * hm - hm * b00 - hm * b01 * hm;
    if (res.norm() <= 1e-14 * anorm)
    {
      break;
    }
    if (it == opts.max_newton)
    {
      break;
    }
    const CMatrix dh = SolveSylvester(b11 - hm * b01, b00 + b01 * hm, -res);
    hm += dh;
    if (dh.norm() <= 1e-15 * (1.0 + hm.norm()))
    {
      break;
    }
  }
  CMatrix u = Orthonormalize(qf.leftCols(k) + qf.rightCols(m) * hm);
  if (!std::isfinite(hm.norm()) || InvarianceResidual(am, u) > opts.tol)
  {
    throw NoConvergence("subspace Newton refinement did not converge");
  }
  return u;
}

double InvariantSeparation(const CMatrix &a, const CMatrix &u)
{
  const Eigen::Index n = a.rows(), k = u.cols();
  if (k == 0 || k == n)
  {
    return 1.0;
  }
  const SortedSchur f = AdaptedSchur(a, u);
  CMatrix x;
  try
  {
    x = SolveTriangularSylvester(f.t.topLeftCorner(k, k), f.t.bottomRightCorner(n - k, n - k),
                                 -f.t.topRightCorner(k, n - k), GapTolerance(a));
  }
  catch (const SylvesterSingular &)
  {
    return 0.0;
  }
  // Complement W = Q0 X + Q1; the angle follows from the component of span(u) normal to W.
  const CMatrix w = f.q.leftCols(k) * x + f.q.rightCols(n - k);
  const Eigen::HouseholderQR<CMatrix> qr(w);
  const CMatrix qfull = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix normal = qfull.rightCols(k).adjoint() * f.q.leftCols(k);
  const Eigen::JacobiSVD<CMatrix> svd(normal);
  return svd.singularValues()(k - 1);
}

SubspaceJet ContinueSubspace(const MatrixPencil &a, const SubspaceJet &from,
                             Complex lambda1, double rho, const ContinuationOptions &opts)
{
  const Complex l0 = from.base;
  if (lambda1 == l0)
  {
    return from;
  }
  const Complex d = lambda1 - l0;
  const Complex irho(0.0, rho);
  auto path = [&](double tau) { return l0 + tau * d + irho * d * tau * (1.0 - tau); };
  const bool ascending = from.kind == SubspaceKind::Stable;
  const int predictor_order = std::min(from.Order(), 6);

  SubspaceJet jet = from;
  jet.h.resize(predictor_order + 1);
  CMatrix u = from.Basis(l0);
  double tau = 0.0, h = opts.max_step;
  while (tau < 1.0)
  {
    if (h < opts.min_step)
    {
      throw PathFailure("subspace continuation step underflow at tau = " +
                        std::to_string(tau));
    }
    const double tn = std::min(1.0, tau + h);
    const Complex ln = path(tn);
    try
    {
      const CMatrix upred = jet.Basis(ln);
      const CMatrix unew = NewtonRefine(a, ln, upred);
      const double sep = InvariantSeparation(Eval(a, ln), unew);
      if (SubspaceAngle(upred, unew) > std::min(opts.max_angle, opts.relative_angle * sep))
      {
        h *= 0.5;
        continue;
      }
      const SortedSchur frame = AdaptedSchur(Eval(a, ln), unew, ascending);
      jet = TaylorJet(a, ln, frame, predictor_order, from.kind);
      u = unew;
    }
    catch (const Error &)
    {
      h *= 0.5;
      continue;
    }
    tau = tn;
    h = std::min(2.0 * h, opts.max_step);
  }
  const SortedSchur frame = AdaptedSchur(Eval(a, lambda1), u, ascending);
  return TaylorJet(a, lambda1, frame, from.Order(), from.kind);
}

SubspaceJet ContinueSubspaceRetry(const MatrixPencil &a, const SubspaceJet &from,
                                  Complex lambda1)
{
  const double schedule[] = {0.5, -0.5, 0.9, -0.9};
  for (int i = 0; i < 4; i++)
  {
    try
    {
      return ContinueSubspace(a, from, lambda1, schedule[i]);
    }
    catch (const PathFailure &)
    {
      if (i == 3)
      {
        throw;
      }
    }
  }
  throw PathFailure("unreachable");
}

}  // namespace ptwise
