// SPDX-License-Identifier: Apache-2.0

#include "ptwise/assembly.hpp"

#include <algorithm>
#include <cmath>
#include "ptwise/errors.hpp"

extern "C"
{
  void zgbtrf_(const int *m, const int *n, const int *kl, const int *ku,
               std::complex<double> *ab, const int *ldab, int *ipiv, int *info);
  void zgbtrs_(const char *trans, const int *n, const int *kl, const int *ku,
               const int *nrhs, const std::complex<double> *ab, const int *ldab,
               const int *ipiv, std::complex<double> *b, const int *ldb, int *info,
               std::size_t trans_len);
}

namespace ptwise
{

namespace
{

// Below this ratio of smallest to largest LU pivot, iota_0 counts as singular.
constexpr double singular_pivot_ratio = 1e-14;

}  // namespace

MatrixPencil ProblemSpec::WorkingMinus() const
{
  return reparam ? Reparametrize(a_minus, *reparam, a_minus.Order() * reparam->degree())
                 : a_minus;
}

MatrixPencil ProblemSpec::WorkingPlus() const
{
  return reparam ? Reparametrize(a_plus, *reparam, a_plus.Order() * reparam->degree())
                 : a_plus;
}

MatrixPencil ProblemSpec::WorkingInterior(double x) const
{
  const MatrixPencil a = interior(x);
  return reparam ? Reparametrize(a, *reparam, a.Order() * reparam->degree()) : a;
}

Complex ProblemSpec::ToLambda(Complex w) const
{
  return reparam ? (*reparam)(w) : w;
}

std::vector<double> UniformGrid(double half_length, int intervals)
{
  if (intervals < 1 || !(half_length > 0.0))
  {
    throw DimensionMismatch("grid needs L > 0 and n >= 1");
  }
  std::vector<double> x(intervals + 1);
  const double h = 2.0 * half_length / intervals;
  for (int j = 0; j <= intervals; j++)
  {
    x[j] = -half_length + j * h;
  }
  return x;
}

AssembledPencil AssembledPencil::Constant(const MatrixPencil &uu, const MatrixPencil &us)
{
  if (uu.Rows() != us.Rows() || uu.Cols() + us.Cols() != uu.Rows() ||
      uu.BasePoint() != us.BasePoint())
  {
    throw DimensionMismatch("bases must be N x k and N x (N - k) about one base point");
  }
  AssembledPencil a;
  a.n_phase = a.dim = uu.Rows();
  a.k_left = uu.Cols();
  a.order = std::max(uu.Order(), us.Order());
  a.base = uu.BasePoint();
  std::vector<CMatrix> c(a.order + 1, CMatrix::Zero(a.dim, a.dim));
  for (int l = 0; l <= a.order; l++)
  {
    if (l <= uu.Order())
    {
      c[l].leftCols(a.k_left) = uu.Coeff(l);
    }
    if (l <= us.Order())
    {
      c[l].rightCols(a.dim - a.k_left) = -us.Coeff(l);
    }
  }
  a.dense = MatrixPencil(a.base, std::move(c));
  return a;
}

AssembledPencil AssembledPencil::Dense(const MatrixPencil &m)
{
  if (!m.IsSquare())
  {
    throw DimensionMismatch("iota must be square");
  }
  AssembledPencil a;
  a.n_phase = a.dim = m.Rows();
  a.order = m.Order();
  a.base = m.BasePoint();
  a.dense = m;
  return a;
}

AssembledPencil AssembledPencil::Bvp(std::vector<double> grid,
                                     const std::vector<MatrixPencil> &nodes,
                                     const MatrixPencil &uu, const MatrixPencil &us)
{
  const Eigen::Index nph = uu.Rows();
  if (us.Rows() != nph || uu.Cols() + us.Cols() != nph || uu.BasePoint() != us.BasePoint())
  {
    throw DimensionMismatch("bases must be N x k and N x (N - k) about one base point");
  }
  if (grid.size() < 2 || nodes.size() != grid.size())
  {
    throw DimensionMismatch("one interior pencil per grid node is required");
  }
  for (std::size_t j = 0; j + 1 < grid.size(); j++)
  {
    if (!(grid[j + 1] > grid[j]))
    {
      throw DimensionMismatch("grid spacing must be positive");
    }
  }
  AssembledPencil a;
  a.bvp = true;
  a.n_phase = nph;
  a.k_left = uu.Cols();
  a.base = uu.BasePoint();
  a.grid = std::move(grid);
  const Eigen::Index n = static_cast<Eigen::Index>(a.grid.size()) - 1;
  a.dim = nph * (n + 2);
  a.node.resize(n + 1);
  for (Eigen::Index j = 0; j <= n; j++)
  {
    if (nodes[j].Rows() != nph || !nodes[j].IsSquare())
    {
      throw DimensionMismatch("interior pencil has the wrong dimension");
    }
    a.node[j] = ShiftTo(nodes[j], a.base).Coeffs();
    a.p = std::max(a.p, static_cast<int>(a.node[j].size()) - 1);
  }
  for (auto &nd : a.node)
  {
    nd.resize(a.p + 1, CMatrix::Zero(nph, nph));
  }
  a.uu = uu.Coeffs();
  a.us = us.Coeffs();
  a.order = std::max({a.p, uu.Order(), us.Order()});
  return a;
}

std::pair<Eigen::Index, Eigen::Index> AssembledPencil::BoundaryRows() const
{
  if (!bvp)
  {
    return {0, dim};
  }
  return {dim - 2 * n_phase, dim};
}

void AssembledPencil::ForEachEntry(
    int l, const std::function<void(Eigen::Index, Eigen::Index, Complex)> &f) const
{
  if (!bvp)
  {
    if (l > order)
    {
      return;
    }
    const CMatrix &c = dense.Coeff(l);
    for (Eigen::Index j = 0; j < dim; j++)
    {
      for (Eigen::Index i = 0; i < dim; i++)
      {
        if (c(i, j) != Complex(0.0))
        {
          f(i, j, c(i, j));
        }
      }
    }
    return;
  }
  const Eigen::Index nph = n_phase, n = static_cast<Eigen::Index>(grid.size()) - 1;
  const Eigen::Index border = nph * (n + 1);
  if (l <= p)
  {
    for (Eigen::Index j = 0; j < n; j++)
    {
      const double h = grid[j + 1] - grid[j];
      for (Eigen::Index c = 0; c < nph; c++)
      {
        for (Eigen::Index r = 0; r < nph; r++)
        {
          const double id = (l == 0 && r == c) ? 1.0 / h : 0.0;
          const Complex left = -id - 0.5 * node[j][l](r, c);
          const Complex right = id - 0.5 * node[j + 1][l](r, c);
          if (left != Complex(0.0))
          {
            f(nph * j + r, nph * j + c, left);
          }
          if (right != Complex(0.0))
          {
            f(nph * j + r, nph * (j + 1) + c, right);
          }
        }
      }
    }
  }
  const Eigen::Index row_l = nph * n, row_r = nph * (n + 1);
  if (l == 0)
  {
    for (Eigen::Index r = 0; r < nph; r++)
    {
      f(row_l + r, r, 1.0);
      f(row_r + r, nph * n + r, 1.0);
    }
  }
  if (l < static_cast<int>(uu.size()))
  {
    for (Eigen::Index i = 0; i < k_left; i++)
    {
      for (Eigen::Index r = 0; r < nph; r++)
      {
        if (uu[l](r, i) != Complex(0.0))
        {
          f(row_l + r, border + i, -uu[l](r, i));
        }
      }
    }
  }
  if (l < static_cast<int>(us.size()))
  {
    for (Eigen::Index i = 0; i < nph - k_left; i++)
    {
      for (Eigen::Index r = 0; r < nph; r++)
      {
        if (us[l](r, i) != Complex(0.0))
        {
          f(row_r + r, border + k_left + i, -us[l](r, i));
        }
      }
    }
  }
}

CVector AssembledPencil::Apply(int l, const CVector &x) const
{
  if (!bvp)
  {
    return l <= order ? CVector(dense.Coeff(l) * x) : CVector(CVector::Zero(dim));
  }
  const Eigen::Index nph = n_phase, n = static_cast<Eigen::Index>(grid.size()) - 1;
  const Eigen::Index border = nph * (n + 1);
  CVector y = CVector::Zero(dim);
  if (l <= p)
  {
    CVector z_prev = node[0][l] * x.segment(0, nph);
    for (Eigen::Index j = 0; j < n; j++)
    {
      CVector z_next = node[j + 1][l] * x.segment(nph * (j + 1), nph);
      auto yj = y.segment(nph * j, nph);
      yj = -0.5 * (z_prev + z_next);
      if (l == 0)
      {
        yj += (x.segment(nph * (j + 1), nph) - x.segment(nph * j, nph)) /
              (grid[j + 1] - grid[j]);
      }
      z_prev.swap(z_next);
    }
  }
  auto yl = y.segment(nph * n, nph);
  auto yr = y.segment(nph * (n + 1), nph);
  if (l == 0)
  {
    yl = x.segment(0, nph);
    yr = x.segment(nph * n, nph);
  }
  if (l < static_cast<int>(uu.size()))
  {
    yl -= uu[l] * x.segment(border, k_left);
  }
  if (l < static_cast<int>(us.size()))
  {
    yr -= us[l] * x.segment(border + k_left, nph - k_left);
  }
  return y;
}

CVector AssembledPencil::ApplyEval(Complex lambda, const CVector &x) const
{
  if (!bvp)
  {
    return Eval(dense, lambda) * x;
  }
  const Complex d = lambda - base;
  const Eigen::Index nph = n_phase, n = static_cast<Eigen::Index>(grid.size()) - 1;
  const Eigen::Index border = nph * (n + 1);
  auto node_apply = [&](Eigen::Index j)
  {
    const CVector xj = x.segment(nph * j, nph);
    CVector z = node[j][p] * xj;
    for (int l = p - 1; l >= 0; l--)
    {
      z *= d;
      z += node[j][l] * xj;
    }
    return z;
  };
  auto series = [&](const std::vector<CMatrix> &c)
  {
    CMatrix m = c.back();
    for (int l = static_cast<int>(c.size()) - 2; l >= 0; l--)
    {
      m *= d;
      m += c[l];
    }
    return m;
  };
  CVector y(dim);
  CVector z_prev = node_apply(0);
  for (Eigen::Index j = 0; j < n; j++)
  {
    CVector z_next = node_apply(j + 1);
    y.segment(nph * j, nph) =
        (x.segment(nph * (j + 1), nph) - x.segment(nph * j, nph)) / (grid[j + 1] - grid[j]) -
        0.5 * (z_prev + z_next);
    z_prev.swap(z_next);
  }
  y.segment(nph * n, nph) = x.segment(0, nph) - series(uu) * x.segment(border, k_left);
  y.segment(nph * (n + 1), nph) =
      x.segment(nph * n, nph) - series(us) * x.segment(border + k_left, nph - k_left);
  return y;
}

Eigen::SparseMatrix<Complex> AssembledPencil::OrderMatrix(int l) const
{
  std::vector<Eigen::Triplet<Complex>> t;
  ForEachEntry(l, [&](Eigen::Index i, Eigen::Index j, Complex v) { t.emplace_back(i, j, v); });
  Eigen::SparseMatrix<Complex> m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

CMatrix AssembledPencil::DenseEval(Complex lambda) const
{
  if (!bvp)
  {
    return Eval(dense, lambda);
  }
  CMatrix m = CMatrix::Zero(dim, dim);
  Complex pw = 1.0;
  for (int l = 0; l <= order; l++)
  {
    ForEachEntry(l, [&](Eigen::Index i, Eigen::Index j, Complex v) { m(i, j) += pw * v; });
    pw *= lambda - base;
  }
  return m;
}

double AssembledPencil::ZeroOrderNorm() const
{
  std::vector<double> rows(dim, 0.0), cols(dim, 0.0);
  ForEachEntry(0,
               [&](Eigen::Index i, Eigen::Index j, Complex v)
               {
                 rows[i] += std::abs(v);
                 cols[j] += std::abs(v);
               });
  const double r = *std::max_element(rows.begin(), rows.end());
  const double c = *std::max_element(cols.begin(), cols.end());
  return std::sqrt(r * c);
}

AssembledPencil AssembleConstant(const MatrixPencil &uu, const MatrixPencil &us)
{
  return AssembledPencil::Constant(uu, us);
}

AssembledPencil AssembleBvp(const ProblemSpec &spec, const MatrixPencil &uu,
                            const MatrixPencil &us)
{
  if (!spec.IsBvp())
  {
    throw DimensionMismatch("problem has no interior coefficient");
  }
  std::vector<double> grid = UniformGrid(spec.half_length, spec.intervals);
  std::vector<MatrixPencil> nodes;
  nodes.reserve(grid.size());
  for (double x : grid)
  {
    nodes.push_back(spec.WorkingInterior(x));
  }
  return AssembledPencil::Bvp(std::move(grid), nodes, uu, us);
}

struct Factorization::Impl
{
  bool dense = true;
  Eigen::PartialPivLU<CMatrix> lu;
  // Banded storage of the reordered bordered matrix: unknowns (a, u_0..u_n, b), rows
  // (left boundary, interior, right boundary).
  int nn = 0, kl = 0, ku = 0, ldab = 0;
  std::vector<Complex> ab;
  std::vector<int> ipiv;
  Eigen::Index nph = 0, n = 0, k_left = 0;

  Eigen::Index ColNew(Eigen::Index c) const
  {
    const Eigen::Index border = nph * (n + 1);
    if (c < border)
    {
      return k_left + c;
    }
    if (c < border + k_left)
    {
      return c - border;
    }
    return c;
  }
  Eigen::Index RowNew(Eigen::Index r) const
  {
    if (r < nph * n)
    {
      return nph + r;
    }
    if (r < nph * (n + 1))
    {
      return r - nph * n;
    }
    return r;
  }
};

Factorization::Factorization(const AssembledPencil &a) : impl(std::make_unique<Impl>())
{
  if (!a.IsBvp())
  {
    const CMatrix m = a.DenseEval(a.BasePoint());
    impl->lu.compute(m);
    const auto d = impl->lu.matrixLU().diagonal().cwiseAbs();
    pivot_ratio = d.maxCoeff() > 0.0 ? d.minCoeff() / d.maxCoeff() : 0.0;
    return;
  }
  Impl &f = *impl;
  f.dense = false;
  f.nph = a.PhaseDim();
  f.n = static_cast<Eigen::Index>(a.Grid().size()) - 1;
  f.k_left = a.LeftDim();
  f.nn = static_cast<int>(a.Dim());
  const int nph = static_cast<int>(f.nph), kl_dim = static_cast<int>(f.k_left);
  f.kl = std::max(nph - 1, 2 * nph - 1 - kl_dim);
  f.ku = kl_dim + nph - 1;
  f.ldab = 2 * f.kl + f.ku + 1;
  f.ab.assign(static_cast<std::size_t>(f.ldab) * f.nn, Complex(0.0));
  a.ForEachEntry(0,
                 [&](Eigen::Index i, Eigen::Index j, Complex v)
                 {
                   const Eigen::Index r = f.RowNew(i), c = f.ColNew(j);
                   f.ab[static_cast<std::size_t>(f.kl + f.ku + r - c) +
                        static_cast<std::size_t>(c) * f.ldab] += v;
                 });
  f.ipiv.resize(f.nn);
  int info = 0;
  zgbtrf_(&f.nn, &f.nn, &f.kl, &f.ku, f.ab.data(), &f.ldab, f.ipiv.data(), &info);
  if (info < 0)
  {
    throw Error("zgbtrf rejected its arguments");
  }
  double dmin = INFINITY, dmax = 0.0;
  for (int j = 0; j < f.nn; j++)
  {
    const double v =
        std::abs(f.ab[static_cast<std::size_t>(f.kl + f.ku) + static_cast<std::size_t>(j) * f.ldab]);
    dmin = std::min(dmin, v);
    dmax = std::max(dmax, v);
  }
  pivot_ratio = (info > 0 || dmax == 0.0) ? 0.0 : dmin / dmax;
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization &&) noexcept = default;
Factorization &Factorization::operator=(Factorization &&) noexcept = default;

CVector Factorization::Solve(const CVector &rhs) const
{
  const Impl &f = *impl;
  if (f.dense)
  {
    return f.lu.solve(rhs);
  }
  CVector b(f.nn);
  for (Eigen::Index r = 0; r < f.nn; r++)
  {
    b(f.RowNew(r)) = rhs(r);
  }
  const char trans = 'N';
  const int nrhs = 1;
  int info = 0;
  zgbtrs_(&trans, &f.nn, &f.kl, &f.ku, &nrhs, f.ab.data(), &f.ldab, f.ipiv.data(), b.data(),
          &f.nn, &info, 1);
  CVector x(f.nn);
  for (Eigen::Index c = 0; c < f.nn; c++)
  {
    x(c) = b(f.ColNew(c));
  }
  return x;
}

Factorization FactorZeroOrder(const AssembledPencil &a)
{
  Factorization f(a);
  if (!(f.PivotRatio() >= singular_pivot_ratio))
  {
    throw SingularZeroOrder("zero-order pencil is numerically singular at the base point");
  }
  return f;
}

}  // namespace ptwise
