// SPDX-License-Identifier: Apache-2.0

#include "ptwise/problems.hpp"

#include <cmath>
#include <limits>
#include <Eigen/Eigenvalues>
#include "ptwise/errors.hpp"
#include "ptwise/subspace.hpp"

namespace ptwise
{

namespace
{

const double kSqrt7 = std::sqrt(7.0);
// Cahn-Hilliard linear speed and its pinched double roots.
const double kChSpeed = 2.0 / (3.0 * std::sqrt(6.0)) * (2.0 + kSqrt7) * std::sqrt(kSqrt7 - 1.0);
const double kChLambda = (3.0 + kSqrt7) * std::sqrt((2.0 + kSqrt7) / 96.0);

double Sech(double x)
{
  return 1.0 / std::cosh(x);
}

CMatrix Block(const std::vector<std::vector<CMatrix>> &b)
{
  const Eigen::Index n = b[0][0].rows();
  CMatrix m(n * b.size(), n * b[0].size());
  for (std::size_t i = 0; i < b.size(); i++)
  {
    for (std::size_t j = 0; j < b[i].size(); j++)
    {
      m.block(n * i, n * j, n, n) = b[i][j];
    }
  }
  return m;
}

// Fourth-order centered d^2/dy^2 on y_j = -pi + j dy, j = 1..ny, dy = 2 pi / (ny + 1), with
// Dirichlet ends and odd reflection for the outer stencil points.
CMatrix DirichletDyy(int ny)
{
  const double dy = 2.0 * M_PI / (ny + 1);
  const double s = 1.0 / (12.0 * dy * dy);
  CMatrix d = CMatrix::Zero(ny, ny);
  const double w[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  for (int j = 0; j < ny; j++)
  {
    for (int o = -2; o <= 2; o++)
    {
      int i = j + o;
      double sign = 1.0;
      if (i == -1 || i == ny)
      {
        continue;  // boundary value is zero
      }
      if (i < -1)
      {
        i = -2 - i;  // u_{-1} = -u_1 in 1-based indexing
        sign = -1.0;
      }
      else if (i > ny)
      {
        i = 2 * ny - i;
        sign = -1.0;
      }
      d(j, i) += sign * w[o + 2] * s;
    }
  }
  return d;
}

std::vector<double> StripY(int ny)
{
  const double dy = 2.0 * M_PI / (ny + 1);
  std::vector<double> y(ny);
  for (int j = 0; j < ny; j++)
  {
    y[j] = -M_PI + (j + 1) * dy;
  }
  return y;
}

double Get(const Params &p, const std::string &key)
{
  return p.at(key);
}

int GetInt(const Params &p, const std::string &key)
{
  const double v = p.at(key);
  if (v != std::floor(v) || v < 1.0)
  {
    throw Error("parameter " + key + " must be a positive integer");
  }
  return static_cast<int>(v);
}

double TailMismatch(const ProblemSpec &s)
{
  const double l = s.half_length;
  return std::max((s.interior(-l).Coeff(0) - s.a_minus.Coeff(0)).norm(),
                  (s.interior(l).Coeff(0) - s.a_plus.Coeff(0)).norm());
}

ProblemSpec FromScalar(const std::string &name, const ScalarModel &m)
{
  ProblemSpec s;
  s.name = name;
  s.a_minus = s.a_plus = CompanionPencil(m);
  s.phase_dim = static_cast<int>(s.a_plus.Rows());
  return s;
}

ProblemSpec AllenCahn(const Params &p)
{
  CMatrix a1 = CMatrix::Zero(2, 2), ainf(2, 2);
  a1(1, 0) = 1.0;
  ainf << 0, 1, 2, 0;
  ProblemSpec s;
  s.name = "allen_cahn_layer";
  s.phase_dim = 2;
  s.a_minus = s.a_plus = MatrixPencil(0.0, {ainf, a1});
  s.interior = [a1](double x)
  {
    const double t = std::tanh(x / std::sqrt(2.0));
    CMatrix a0(2, 2);
    a0 << 0, 1, -1.0 + 3.0 * t * t, 0;
    return MatrixPencil(0.0, {a0, a1});
  };
  s.half_length = Get(p, "L");
  s.intervals = GetInt(p, "n");
  return s;
}

ProblemSpec SechWell(const Params &p)
{
  const double f0 = Get(p, "F0");
  CMatrix a1 = CMatrix::Zero(2, 2), ainf(2, 2);
  a1(1, 0) = 1.0;
  ainf << 0, 1, 0, 0;
  ProblemSpec s;
  s.name = "sech_well";
  s.phase_dim = 2;
  s.a_minus = s.a_plus = MatrixPencil(0.0, {ainf, a1});
  s.interior = [a1, f0](double x)
  {
    const double v = Sech(x);
    CMatrix a0(2, 2);
    a0 << 0, 1, -f0 * v * v, 0;
    return MatrixPencil(0.0, {a0, a1});
  };
  s.half_length = Get(p, "L");
  s.intervals = GetInt(p, "n");
  s.reparam = ScalarPoly({0.0, 0.0, 1.0});
  return s;
}

ProblemSpec Strip(const Params &p, bool fourth)
{
  const int ny = GetInt(p, "Ny");
  const double eps = Get(p, "eps");
  const bool separable = !fourth && Get(p, "separable") != 0.0;
  const CMatrix d = DirichletDyy(ny);
  const std::vector<double> y = StripY(ny);
  const CMatrix id = CMatrix::Identity(ny, ny), z = CMatrix::Zero(ny, ny);
  auto potential = [=](double x)
  {
    CMatrix v = CMatrix::Zero(ny, ny);
    for (int j = 0; j < ny; j++)
    {
      const double s = separable ? Sech(0.5 * x) : Sech(std::hypot(x, y[j]));
      v(j, j) = separable ? 0.5 * s * s : s * s;
    }
    return v;
  };
  // Ground transverse mode of the discrete -d_yy (1/4 in the continuum). The reparam is
  // centred on the discrete branch point so that no square root is left near gamma = 0.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> modes(-d.real(), Eigen::EigenvaluesOnly);
  const double mu = modes.eigenvalues()(0);
  ProblemSpec s;
  s.name = fourth ? "schrodinger_strip_4th" : "schrodinger_strip";
  std::function<CMatrix(double)> a0_at;
  CMatrix a1;
  if (!fourth)
  {
    // w_xx = (lambda - D - eps V) w.
    a1 = Block({{z, z}, {id, z}});
    a0_at = [=](double x) { return Block({{z, id}, {-d - eps * potential(x), z}}); };
    s.reparam = ScalarPoly({-mu, 0.0, 1.0});
  }
  else
  {
    // w_xxxx = -2 D w_xx - D^2 w + eps V w - lambda w.
    a1 = Block({{z, z, z, z}, {z, z, z, z}, {z, z, z, z}, {-id, z, z, z}});
    const CMatrix d2 = d * d;
    a0_at = [=](double x)
    {
      return Block({{z, id, z, z}, {z, z, id, z}, {z, z, z, id},
                    {-d2 + eps * potential(x), z, -2.0 * d, z}});
    };
    s.reparam = ScalarPoly({-mu * mu, 0.0, 1.0});
  }
  s.phase_dim = static_cast<int>(a1.rows());
  // V vanishes at +-infinity.
  CMatrix ainf = a0_at(std::numeric_limits<double>::infinity());
  s.a_minus = s.a_plus = MatrixPencil(0.0, {ainf, a1});
  s.interior = [a0_at, a1](double x) { return MatrixPencil(0.0, {a0_at(x), a1}); };
  s.half_length = Get(p, "L");
  s.intervals = GetInt(p, "n");
  return s;
}

ProblemSpec Robin(const Params &p)
{
  CMatrix a0(2, 2), a1 = CMatrix::Zero(2, 2);
  a0 << 0, 1, 0, 0;
  a1(1, 0) = 1.0;
  ProblemSpec s;
  s.name = "robin_half_line";
  s.phase_dim = 2;
  s.a_minus = s.a_plus = MatrixPencil(0.0, {a0, a1});
  CMatrix bc(2, 1);
  bc << Get(p, "n2"), -Get(p, "n1");
  s.left_basis = bc;
  if (Get(p, "reparam") != 0.0)
  {
    s.reparam = ScalarPoly({0.0, 0.0, 1.0});
  }
  return s;
}

ProblemSpec CoupledTransport(const Params &p)
{
  CMatrix a0 = CMatrix::Zero(2, 2), a1 = CMatrix::Zero(2, 2);
  a0(0, 1) = Get(p, "eps");
  a1(0, 0) = -1.0;
  a1(1, 1) = 1.0;
  ProblemSpec s;
  s.name = "coupled_transport";
  s.phase_dim = 2;
  s.a_minus = s.a_plus = MatrixPencil(0.0, {a0, a1});
  return s;
}

}  // namespace

const std::vector<CatalogEntry> &Catalog()
{
  static const std::vector<CatalogEntry> catalog = {
      {"convection_diffusion", "w_t = w_xx + 2 w_x + w", {}, {{"branch point", 0.0}}},
      {"swift_hohenberg", "w_t = -(d_xx + 1)^2 w", {}, {{"branch point", 0.0}}},
      {"cahn_hilliard",
       "w_t = -w_xxxx - w_xx + c w_x",
       {{"c", kChSpeed}},
       {{"branch point", Complex(0.0, kChLambda)}, {"branch point", Complex(0.0, -kChLambda)}}},
      {"kdv", "w_t = w_xxx", {}, {{"triple root", 0.0}}},
      {"beam", "w_tt = -w_xxxx", {}, {{"multiple root", 0.0}}},
      {"efkpp",
       "w_t = -eps^2 w_xxxx + w_xx + c w_x + w",
       {{"eps", 0.2}, {"c", 0.0}},
       {{"spreading speed", EfkppLinearSpeed(0.2)}}},
      {"coupled_transport",
       "w1_t = -w1_x + eps w2, w2_t = w2_x",
       {{"eps", 0.1}},
       {{"eigenvalue", 0.0}}},
      {"allen_cahn_layer",
       "lambda w = w_xx + (1 - 3 tanh^2(x / sqrt 2)) w",
       {{"L", 10.0}, {"n", 400.0}},
       {{"eigenvalue", 0.0}, {"eigenvalue", -1.5}, {"branch point", -2.0}}},
      {"sech_well",
       "lambda w = w_xx + F0 sech^2(x) w on lambda = gamma^2",
       {{"F0", -0.1}, {"L", 15.0}, {"n", 600.0}},
       {{"resonance gamma", -0.5 + std::sqrt(0.15)}}},
      {"schrodinger_strip",
       "w_xx + w_yy + eps V w = lambda w on y in (-pi, pi), lambda = gamma^2 - 1/4",
       {{"eps", 0.05}, {"Ny", 40.0}, {"L", 6.0}, {"n", 300.0}, {"separable", 0.0}},
       {{"gamma slope", 0.567402}}},
      {"schrodinger_strip_4th",
       "-(d_xx + d_yy)^2 w + eps V w = lambda w, lambda = gamma^2 - 1/16",
       {{"eps", 0.05}, {"Ny", 20.0}, {"L", 6.0}, {"n", 200.0}},
       {{"gamma slope", 0.802428}}},
      {"robin_half_line",
       "lambda w = w_xx on x > 0, n1 w + n2 w_x = 0",
       {{"n1", 1.0}, {"n2", 1.0}, {"reparam", 1.0}},
       {{"gamma", 1.0}}},
  };
  return catalog;
}

const CatalogEntry &FindEntry(const std::string &name)
{
  for (const auto &e : Catalog())
  {
    if (e.name == name)
    {
      return e;
    }
  }
  throw UnknownProblem("unknown problem '" + name + "'");
}

std::optional<ScalarModel> ScalarModelFor(const std::string &name, const Params &params)
{
  const CatalogEntry &e = FindEntry(name);
  Params p = e.defaults;
  for (const auto &[k, v] : params)
  {
    p[k] = v;
  }
  if (name == "convection_diffusion")
  {
    return ScalarModel{{1.0, 2.0, 1.0}, 1};
  }
  if (name == "swift_hohenberg")
  {
    return ScalarModel{{-1.0, 0.0, -2.0, 0.0, -1.0}, 1};
  }
  if (name == "cahn_hilliard")
  {
    return ScalarModel{{0.0, p.at("c"), -1.0, 0.0, -1.0}, 1};
  }
  if (name == "kdv")
  {
    return ScalarModel{{0.0, 0.0, 0.0, 1.0}, 1};
  }
  if (name == "beam")
  {
    return ScalarModel{{0.0, 0.0, 0.0, 0.0, -1.0}, 2};
  }
  if (name == "efkpp")
  {
    const double eps = p.at("eps");
    return ScalarModel{{1.0, p.at("c"), 1.0, 0.0, -eps * eps}, 1};
  }
  return std::nullopt;
}

ProblemSpec MakeProblem(const std::string &name, const Params &params)
{
  const CatalogEntry &e = FindEntry(name);
  Params p = e.defaults;
  p["swap"] = 0.0;
  for (const auto &[k, v] : params)
  {
    if (!p.count(k))
    {
      throw Error("problem '" + name + "' has no parameter '" + k + "'");
    }
    p[k] = v;
  }
  ProblemSpec s;
  if (auto m = ScalarModelFor(name, p))
  {
    if (m->symbol.back() == 0.0)
    {
      throw Error("leading symbol coefficient vanishes");
    }
    s = FromScalar(name, *m);
  }
  else if (name == "coupled_transport")
  {
    s = CoupledTransport(p);
  }
  else if (name == "allen_cahn_layer")
  {
    s = AllenCahn(p);
  }
  else if (name == "sech_well")
  {
    s = SechWell(p);
  }
  else if (name == "schrodinger_strip")
  {
    s = Strip(p, false);
  }
  else if (name == "schrodinger_strip_4th")
  {
    s = Strip(p, true);
  }
  else if (name == "robin_half_line")
  {
    s = Robin(p);
  }
  s.swap_subspaces = p.at("swap") != 0.0;
  if (s.IsBvp())
  {
    s.tail_mismatch = TailMismatch(s);
  }
  return s;
}

MatrixPencil CompanionPencil(const ScalarModel &m)
{
  const int n = static_cast<int>(m.symbol.size()) - 1;
  const Complex lead = m.symbol[n];
  if (n < 1 || lead == 0.0 || m.time_order < 1)
  {
    throw Error("scalar model needs a nonzero leading coefficient of order >= 1");
  }
  std::vector<CMatrix> c(m.time_order + 1, CMatrix::Zero(n, n));
  for (int i = 0; i + 1 < n; i++)
  {
    c[0](i, i + 1) = 1.0;
  }
  for (int j = 0; j < n; j++)
  {
    c[0](n - 1, j) = -m.symbol[j] / lead;
  }
  c[m.time_order](n - 1, 0) = 1.0 / lead;
  return MatrixPencil(0.0, std::move(c));
}

Complex DispersionRelation(const ScalarModel &m, Complex lambda, Complex nu)
{
  Complex p = 0.0;
  for (auto it = m.symbol.rbegin(); it != m.symbol.rend(); ++it)
  {
    p = p * nu + *it;
  }
  return p - std::pow(lambda, m.time_order);
}

ScalarModel Comoving(const ScalarModel &m, Complex c)
{
  ScalarModel r = m;
  r.symbol[1] += c;
  return r;
}

MatrixPencil SpreadingSpeedPencil(const std::string &name, const Params &params)
{
  const auto m = ScalarModelFor(name, params);
  if (!m)
  {
    throw UnknownProblem("no comoving scalar model for '" + name + "'");
  }
  // At lambda = 0 the companion form is affine in c through the w_x entry of the last row.
  const MatrixPencil a = CompanionPencil(*m);
  const Eigen::Index n = a.Rows();
  CMatrix c1 = CMatrix::Zero(n, n);
  c1(n - 1, 1) = -1.0 / m->symbol.back();
  return MatrixPencil(0.0, {a.Coeff(0), c1});
}

double EfkppLinearSpeed(double eps)
{
  const double e2 = eps * eps;
  if (12.0 * e2 > 1.0)
  {
    return std::numeric_limits<double>::quiet_NaN();
  }
  // (6 - 6 s) / eps^2 = 72 / (1 + s), free of cancellation as eps -> 0.
  const double s = std::sqrt(1.0 - 12.0 * e2);
  return std::sqrt(72.0 / (1.0 + s)) * (s + 2.0) / 9.0;
}

SpectralResult SpreadingSpeed(const std::string &name, const Params &params, Complex c0,
                              const RunOptions &opts)
{
  const auto m = ScalarModelFor(name, params);
  if (!m)
  {
    throw UnknownProblem("no comoving scalar model for '" + name + "'");
  }
  // Boundary subspaces at (lambda, c) = (0, c0) from the sorted split at the reference
  // point, carried to lambda = 0 along a path.
  const MatrixPencil al = CompanionPencil(Comoving(*m, c0));
  const Complex lref = DefaultReferencePoint(0.0);
  const int k = MorseIndex(al, lref);
  const int order = 12;
  const SubspaceJet ju =
      ContinueSubspaceRetry(al, TaylorJet(al, lref, k, order, SubspaceKind::Unstable), 0.0);
  const SubspaceJet js =
      ContinueSubspaceRetry(al, TaylorJet(al, lref, k, order, SubspaceKind::Stable), 0.0);

  ProblemSpec spec;
  spec.name = name + " spreading speed";
  spec.a_minus = spec.a_plus = SpreadingSpeedPencil(name, params);
  spec.phase_dim = static_cast<int>(spec.a_plus.Rows());
  spec.unstable_dim = k;
  spec.seed_subspaces = std::make_pair(ju.Basis(0.0), js.Basis(0.0));
  SpectralResult r = RunWithRestarts(spec, c0, opts);
  if (r.classification != Classification::Unresolved &&
      std::abs(r.value.imag()) > 1e-6 * (1.0 + std::abs(r.value)))
  {
    r.notes.push_back("complex pinched double root; no real spreading speed");
    r.classification = Classification::Unresolved;
  }
  return r;
}

}  // namespace ptwise
