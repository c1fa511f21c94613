// SPDX-License-Identifier: Apache-2.0

#include "ptwise/newton.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <limits>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include "ptwise/errors.hpp"
#include "ptwise/subspace.hpp"

namespace ptwise
{

namespace
{

struct State
{
  CVector u, v;
  Complex lambda, nu;
};

CVector Residual(const MatrixPencil &a, const State &s, const CVector &e0)
{
  const Eigen::Index n = s.u.size();
  const CMatrix m = Eval(a, s.lambda) - s.nu * CMatrix::Identity(n, n);
  CVector f(2 * n + 2);
  f.head(n) = m * s.u;
  f.segment(n, n) = m * s.v - s.u;
  f(2 * n) = e0.dot(s.u) - 1.0;
  f(2 * n + 1) = e0.dot(s.v);
  return f;
}

CMatrix Jacobian(const MatrixPencil &a, const State &s, const CVector &e0)
{
  const Eigen::Index n = s.u.size();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix m = Eval(a, s.lambda) - s.nu * id;
  const CMatrix da = EvalDerivative(a, s.lambda);
  CMatrix j = CMatrix::Zero(2 * n + 2, 2 * n + 2);
  j.block(0, 0, n, n) = m;
  j.block(n, 0, n, n) = -id;
  j.block(n, n, n, n) = m;
  j.block(2 * n, 0, 1, n) = e0.adjoint();
  j.block(2 * n + 1, n, 1, n) = e0.adjoint();
  j.block(0, 2 * n, n, 1) = da * s.u;
  j.block(n, 2 * n, n, 1) = da * s.v;
  j.block(0, 2 * n + 1, n, 1) = -s.u;
  j.block(n, 2 * n + 1, n, 1) = -s.v;
  return j;
}

// Eigenvector of m whose eigenvalue is nearest to target.
std::pair<CVector, Complex> NearestEigenpair(const CMatrix &m, Complex target)
{
  const Eigen::ComplexEigenSolver<CMatrix> es(m);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < m.rows(); i++)
  {
    if (std::abs(es.eigenvalues()(i) - target) < std::abs(es.eigenvalues()(best) - target))
    {
      best = i;
    }
  }
  return {es.eigenvectors().col(best), es.eigenvalues()(best)};
}

// Closest pair between the unstable and stable subspaces at lambda.
CVector IntersectionGuess(const MatrixPencil &a, Complex lambda, int k)
{
  const CMatrix m = Eval(a, lambda);
  const Eigen::Index n = m.rows();
  if (k <= 0 || k >= n)
  {
    throw Error("branch point guess needs nontrivial unstable and stable subspaces");
  }
  // Eigenvectors rather than a sorted Schur form: coinciding eigenvalues at the split are
  // exactly what is sought here.
  const Eigen::ComplexEigenSolver<CMatrix> es(m);
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; i++)
  {
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y)
            { return es.eigenvalues()(x).real() > es.eigenvalues()(y).real(); });
  CMatrix eu(n, k), es_(n, n - k);
  for (int i = 0; i < k; i++)
  {
    eu.col(i) = es.eigenvectors().col(order[i]);
  }
  for (Eigen::Index i = k; i < n; i++)
  {
    es_.col(i - k) = es.eigenvectors().col(order[i]);
  }
  const CMatrix qu = Orthonormalize(eu), qs = Orthonormalize(es_);
  const Eigen::JacobiSVD<CMatrix> svd(qu.adjoint() * qs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const CVector x = qu * svd.matrixU().col(0);
  CVector y = qs * svd.matrixV().col(0);
  const Complex c = y.dot(x);
  if (std::abs(c) > 0.0)
  {
    y *= c / std::abs(c);
  }
  return 0.5 * (x + y);
}

double MinSingular(const CMatrix &j, double &cond)
{
  const Eigen::JacobiSVD<CMatrix> svd(j);
  const auto &s = svd.singularValues();
  const double smin = s(s.size() - 1);
  cond = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  return smin;
}

// Osborne balancing with powers of two: d such that diag(d)^-1 m diag(d) has comparable
// row and column norms.
Eigen::VectorXd BalancingScales(const CMatrix &m)
{
  const Eigen::Index n = m.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  CMatrix b = m;
  for (int sweep = 0; sweep < 20; sweep++)
  {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; i++)
    {
      const double c = b.col(i).norm() - std::abs(b(i, i));
      const double r = b.row(i).norm() - std::abs(b(i, i));
      if (c <= 0.0 || r <= 0.0)
      {
        continue;
      }
      const double f = std::exp2(std::round(0.5 * std::log2(r / c)));
      if (f != 1.0)
      {
        b.col(i) *= f;
        b.row(i) /= f;
        d(i) *= f;
        changed = true;
      }
    }
    if (!changed)
    {
      break;
    }
  }
  return d;
}

BranchPoint NewtonCore(const MatrixPencil &a, Complex lambda_guess,
                       const BranchNewtonOptions &opts)
{
  const Eigen::Index n = a.Rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a0 = Eval(a, lambda_guess);

  State s;
  s.lambda = lambda_guess;
  if (opts.u_guess)
  {
    s.u = *opts.u_guess;
    s.nu = s.u.dot(a0 * s.u) / s.u.squaredNorm();
  }
  else if (opts.nu_guess)
  {
    std::tie(s.u, s.nu) = NearestEigenpair(a0, *opts.nu_guess);
  }
  else
  {
    const int k = opts.unstable_dim ? *opts.unstable_dim
                                    : MorseIndex(a, DefaultReferencePoint(lambda_guess));
    s.u = IntersectionGuess(a, lambda_guess, k);
    s.nu = s.u.dot(a0 * s.u) / s.u.squaredNorm();
  }
  if (s.u.size() != n)
  {
    throw DimensionMismatch("branch point guess has the wrong length");
  }

  CVector e0;
  if (opts.e0)
  {
    e0 = *opts.e0;
  }
  else
  {
    const Eigen::JacobiSVD<CMatrix> svd(a0 - s.nu * id, Eigen::ComputeFullV);
    e0 = svd.matrixV().col(n - 1);
  }
  const Complex scale = e0.dot(s.u);
  if (std::abs(scale) < 1e-14 * s.u.norm())
  {
    throw Error("branch point guess is orthogonal to the kernel anchor");
  }
  s.u /= scale;

  // Least-squares generalized eigenvector.
  CMatrix ls(n + 1, n);
  ls.topRows(n) = a0 - s.nu * id;
  ls.row(n) = e0.adjoint();
  CVector rhs = CVector::Zero(n + 1);
  rhs.head(n) = s.u;
  s.v = ls.colPivHouseholderQr().solve(rhs);

  CVector f = Residual(a, s, e0);
  double fnorm = f.norm();
  double cond = 0.0;
  const double smin0 = MinSingular(Jacobian(a, s, e0), cond);
  double smin = smin0;
  const double fscale = 1.0 + a0.norm();
  int step = 0;
  std::vector<Complex> iterates;
  for (; step < opts.max_steps && fnorm > opts.tol * fscale; step++)
  {
    const CMatrix j = Jacobian(a, s, e0);
    smin = MinSingular(j, cond);
    if (cond > opts.max_condition)
    {
      throw SingularJacobian("branch point Jacobian is singular (degenerate root)",
                             s.lambda.real(), s.lambda.imag());
    }
    const CVector dz = j.fullPivLu().solve(-f);
    double t = 1.0;
    State trial;
    CVector ft;
    for (int halving = 0; halving <= 8; halving++, t *= 0.5)
    {
      trial.u = s.u + t * dz.head(n);
      trial.v = s.v + t * dz.segment(n, n);
      trial.lambda = s.lambda + t * dz(2 * n);
      trial.nu = s.nu + t * dz(2 * n + 1);
      ft = Residual(a, trial, e0);
      if (ft.norm() < fnorm)
      {
        break;
      }
    }
    s = trial;
    f = ft;
    fnorm = f.norm();
    iterates.push_back(s.lambda);
  }

  if (fnorm > opts.tol * fscale)
  {
    // Linear convergence with a collapsing Jacobian: a degenerate (higher-order) root.
    if (smin < 1e-2 * smin0 || cond > 1e-4 * opts.max_condition)
    {
      throw SingularJacobian("branch point Jacobian degenerates (higher-order root)",
                             s.lambda.real(), s.lambda.imag());
    }
    throw NoConvergence("branch point Newton did not converge");
  }
  // At a higher-order root Newton still drives the residual down, but only linearly in nu
  // while the Jacobian collapses; a regular double root keeps sigma_min of order one.
  const double smin_final = MinSingular(Jacobian(a, s, e0), cond);
  if (cond > opts.max_condition || smin_final < 1e-4 * smin0)
  {
    throw SingularJacobian("branch point Jacobian is singular at the root (higher-order root)",
                           s.lambda.real(), s.lambda.imag());
  }

  BranchPoint bp;
  bp.lambda = s.lambda;
  bp.nu = s.nu;
  bp.u = s.u;
  bp.v = s.v;
  bp.e0 = e0;
  bp.residual = fnorm;
  bp.steps = step;
  bp.iterates = std::move(iterates);
  return bp;
}

}  // namespace

BranchPoint BranchPointNewton(const MatrixPencil &a, Complex lambda_guess,
                              const BranchNewtonOptions &opts)
{
  if (!a.IsSquare())
  {
    throw DimensionMismatch("branch point Newton needs a square pencil");
  }
  // Companion forms with a small leading symbol are badly scaled; a diagonal similarity
  // leaves the double roots in place.
  // Balanced on the entrywise magnitudes of all coefficients so that a guess near a
  // degenerate point does not dictate the scaling.
  Eigen::MatrixXd mag = Eigen::MatrixXd::Zero(a.Rows(), a.Cols());
  for (const CMatrix &c : a.Coeffs())
  {
    mag += c.cwiseAbs();
  }
  const Eigen::VectorXd d = BalancingScales(mag.cast<Complex>());
  std::vector<CMatrix> coeffs;
  for (const CMatrix &c : a.Coeffs())
  {
    coeffs.push_back(d.cwiseInverse().asDiagonal() * c * d.asDiagonal());
  }
  BranchNewtonOptions o = opts;
  if (o.u_guess)
  {
    if (o.u_guess->size() != a.Rows())
    {
      throw DimensionMismatch("branch point guess has the wrong length");
    }
    o.u_guess = CVector(d.cwiseInverse().asDiagonal() * *o.u_guess);
  }
  if (o.e0)
  {
    o.e0 = CVector(d.asDiagonal() * *o.e0);
  }
  BranchPoint bp = NewtonCore(MatrixPencil(a.BasePoint(), coeffs), lambda_guess, o);
  bp.u = d.asDiagonal() * bp.u;
  bp.v = d.asDiagonal() * bp.v;
  bp.e0 = d.cwiseInverse().asDiagonal() * bp.e0;
  return bp;
}

std::pair<Complex, Complex> DoubleRootResidual(const MatrixPencil &a, Complex lambda,
                                               Complex nu)
{
  const CMatrix m = Eval(a, lambda);
  const CMatrix id = CMatrix::Identity(m.rows(), m.cols());
  auto det = [&](Complex z) { return (m - z * id).partialPivLu().determinant(); };
  const double h = 1e-5 * (1.0 + std::abs(nu));
  return {det(nu), (det(nu + h) - det(nu - h)) / (2.0 * h)};
}

}  // namespace ptwise
