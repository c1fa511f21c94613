// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <algorithm>
#include <numeric>
#include <Eigen/Eigenvalues>
#include "ptwise/errors.hpp"
#include "ptwise/ipm.hpp"
#include "ptwise/subspace.hpp"
#include "test_util.hpp"

using namespace ptwise;
using ptwise::testing::RandomMatrix;
using ptwise::testing::RandomPencil;

namespace
{

MatrixPencil Scalar(std::vector<Complex> c, Complex base = 0.0)
{
  std::vector<CMatrix> m;
  for (Complex z : c)
  {
    m.push_back(CMatrix::Constant(1, 1, z));
  }
  return MatrixPencil(base, std::move(m));
}

IterationRecord Run(const MatrixPencil &p, int iters, double tol = 0.0, std::uint64_t seed = 7)
{
  const auto a = AssembledPencil::Dense(p);
  const auto f = FactorZeroOrder(a);
  std::mt19937_64 rng(seed);
  return PowerIterate(a, f, RandomMatrix(rng, a.Dim(), 1), iters, tol);
}

// u_xx + 2 u_x + u = lambda u, double spatial root at lambda = 0.
ProblemSpec ConvectionDiffusion()
{
  CMatrix a0(2, 2), a1(2, 2);
  a0 << 0, 1, -1, -2;
  a1 << 0, 0, 1, 0;
  ProblemSpec s;
  s.name = "cd";
  s.phase_dim = 2;
  s.a_minus = s.a_plus = MatrixPencil(0.0, {a0, a1});
  return s;
}

}  // namespace

TEST_CASE("scalar pencil 1 - lambda converges in one step")
{
  const auto rec = Run(Scalar({1.0, -1.0}), 3);
  CHECK(std::abs(rec.predictions[0] - 1.0) < 1e-15);
  CHECK(rec.residuals[0] < 1e-15);
  CHECK(PredictLambda(rec) == rec.predictions.back());
}

TEST_CASE("quadratic scalar pencil converges at rate 1/4")
{
  // (lambda - 1/2)(lambda - 2).
  const auto rec = Run(Scalar({1.0, -2.5, 1.0}), 20);
  for (int k = 6; k < 16; k++)
  {
    const double ratio =
        std::abs(rec.predictions[k] - 0.5) / std::abs(rec.predictions[k - 1] - 0.5);
    CHECK(ratio == doctest::Approx(0.25).epsilon(1e-3));
  }
}

TEST_CASE("rational scalar pencil converges past the Taylor radius")
{
  // (lambda - 2) / (1 - lambda): iota_0 = -2, iota_l = -1; radius 1, zero at 2.
  std::vector<Complex> c(201, -1.0);
  c[0] = -2.0;
  // The recursion cancels about one bit per step here, so stay short.
  const auto rec = Run(Scalar(c), 12);
  CHECK(std::abs(PredictLambda(rec) - 2.0) < 1e-11);
}

TEST_CASE("two nearby eigenvalues: slow convergence to the nearer one")
{
  CMatrix i0 = CMatrix::Zero(2, 2), i1 = -CMatrix::Identity(2, 2);
  i0(0, 0) = 1.0;
  i0(1, 1) = 1.05;
  const auto rec = Run(MatrixPencil(0.0, {i0, i1}), 400);
  CHECK(std::abs(PredictLambda(rec) - 1.0) < 1e-6);
  // Diagonal (normal) pencil: the inner-product prediction squares the rate.
  for (int k = 100; k < 110; k++)
  {
    const double ratio =
        std::abs(rec.predictions[k] - 1.0) / std::abs(rec.predictions[k - 1] - 1.0);
    CHECK(ratio == doctest::Approx(1.0 / (1.05 * 1.05)).epsilon(1e-3));
  }
}

TEST_CASE("random polynomial pencils match the companion oracle")
{
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; trial++)
  {
    const int n = 2 + trial % 3, d = 1 + trial % 3;
    const auto p = RandomPencil(rng, n, d);
    // Companion linearization: lambda-eigenvalues of sum_l C_l lambda^l.
    const Eigen::Index nd = n * d;
    CMatrix comp = CMatrix::Zero(nd, nd);
    const Eigen::PartialPivLU<CMatrix> lead(p.Coeff(d));
    for (int l = 0; l < d; l++)
    {
      comp.block((d - 1) * n, l * n, n, n) = -lead.solve(p.Coeff(l));
    }
    for (int l = 0; l + 1 < d; l++)
    {
      comp.block(l * n, (l + 1) * n, n, n) = CMatrix::Identity(n, n);
    }
    const Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
    std::vector<double> dist;
    for (Eigen::Index i = 0; i < nd; i++)
    {
      dist.push_back(std::abs(es.eigenvalues()(i)));
    }
    std::vector<Eigen::Index> order(nd);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return dist[x] < dist[y]; });
    // Skip nearly tied nearest pairs where convergence would take too long.
    if (nd > 1 && dist[order[0]] > 0.8 * dist[order[1]])
    {
      continue;
    }
    const auto rec = Run(p, 400, 1e-14);
    const Complex expect = es.eigenvalues()(order[0]);
    CHECK(std::abs(PredictLambda(rec) - expect) <= 1e-9 * (1.0 + std::abs(expect)));
    checked++;
  }
  CHECK(checked > 50);
}

TEST_CASE("iterates are exact up to the truncation order")
{
  const auto spec = ConvectionDiffusion();
  const auto ju = TaylorJet(spec.a_minus, 1.0, 1, 40, SubspaceKind::Unstable);
  const auto js = TaylorJet(spec.a_plus, 1.0, 1, 40, SubspaceKind::Stable);
  const int m = 20;
  const auto lo = AssembleConstant(BasisSeries(ju, m), BasisSeries(js, m));
  const auto hi = AssembleConstant(BasisSeries(ju, m + 10), BasisSeries(js, m + 10));
  std::mt19937_64 rng(3);
  const CVector u0 = RandomMatrix(rng, 2, 1);
  const auto a = PowerIterate(lo, FactorZeroOrder(lo), u0, m, 0.0);
  const auto b = PowerIterate(hi, FactorZeroOrder(hi), u0, m + 10, 0.0);
  for (int k = 0; k < m; k++)
  {
    CHECK(std::abs(a.predictions[k] - b.predictions[k]) <=
          1e-14 * std::abs(b.predictions[k]));
  }
  CHECK(std::abs(a.predictions[m - 1] - b.predictions[m + 9]) > 1e-6);
}

TEST_CASE("breakdown on a constant intersection map")
{
  const auto a = AssembledPencil::Dense(MatrixPencil(0.0, {CMatrix::Identity(2, 2),
                                                           CMatrix::Zero(2, 2)}));
  CHECK_THROWS_AS(PowerIterate(a, FactorZeroOrder(a), CVector::Ones(2), 5, 0.0), Breakdown);
}

TEST_CASE("tail classification")
{
  std::vector<Complex> geo, alg, noise;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 1; k <= 40; k++)
  {
    geo.push_back(2.0 + std::pow(0.7, k));
    alg.push_back(-0.5 / k + 0.3 / (k * k));
    noise.push_back(Complex(u(rng), u(rng)));
  }
  CHECK(TailBehavior(geo) == Tail::Geometric);
  CHECK(TailBehavior(alg) == Tail::Algebraic);
  CHECK(TailBehavior(noise) == Tail::Indeterminate);
  CHECK(TailBehavior(std::vector<Complex>(5, 1.0)) == Tail::Indeterminate);
}

TEST_CASE("convection-diffusion predictions drift like 1/k toward the branch point")
{
  const auto spec = ConvectionDiffusion();
  const int m = 1000;
  const auto ju = TaylorJet(spec.a_minus, 1.0, 1, m, SubspaceKind::Unstable);
  const auto js = TaylorJet(spec.a_plus, 1.0, 1, m, SubspaceKind::Stable);
  const auto a = AssembleConstant(BasisSeries(ju, m), BasisSeries(js, m));
  std::mt19937_64 rng(11);
  const auto rec = PowerIterate(a, FactorZeroOrder(a), RandomMatrix(rng, 2, 1), m, 0.0);
  // k (lambda_k - lambda*) settles to a constant drift over k in [200, 1000].
  double lo = 1e300, hi = 0.0;
  for (int k = 200; k <= 1000; k++)
  {
    const double c = k * std::abs(rec.predictions[k - 1]);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  MESSAGE("drift constant " << lo << " .. " << hi);
  CHECK(hi - lo <= 0.05 * hi);
  CHECK(TailBehavior(rec.predictions) == Tail::Algebraic);
}

TEST_CASE("restarted run: branch point of convection-diffusion")
{
  const auto r = RunWithRestarts(ConvectionDiffusion(), 1.0);
  CHECK(r.classification == Classification::BranchPoint);
  CHECK(std::abs(r.lambda) < 1e-9);
  CHECK(r.tail == Tail::Algebraic);
}

TEST_CASE("restarted run without the Newton handoff")
{
  RunOptions o;
  o.newton_handoff = false;
  const auto r = RunWithRestarts(ConvectionDiffusion(), Complex(1.0, 1.0), o);
  CHECK(r.converged);
  CHECK(r.classification == Classification::BranchPoint);
  CHECK(std::abs(r.lambda) < 1e-8);
}

TEST_CASE("restarted run: eigenvalue on the gamma surface")
{
  CMatrix m0(2, 2), p0(2, 2), a1(2, 2);
  m0 << 0, 1, 0, -2;
  p0 << 0, 1, 0, 2;
  a1 << 0, 0, 1, 0;
  ProblemSpec s;
  s.phase_dim = 2;
  s.a_minus = MatrixPencil(0.0, {m0, a1});
  s.a_plus = MatrixPencil(0.0, {p0, a1});
  s.reparam = ScalarPoly({-1.0, 0.0, 1.0});
  const auto r = RunWithRestarts(s, 1.5);
  CHECK(r.converged);
  CHECK(r.classification == Classification::Eigenvalue);
  REQUIRE(r.gamma);
  CHECK(std::abs(*r.gamma - 1.0) < 1e-10);
  CHECK(std::abs(r.lambda) < 1e-9);
}

TEST_CASE("seeded runs are deterministic")
{
  RunOptions o;
  o.seed = 99;
  o.newton_handoff = false;
  const auto a = RunWithRestarts(ConvectionDiffusion(), Complex(0.5, 0.5), o);
  const auto b = RunWithRestarts(ConvectionDiffusion(), Complex(0.5, 0.5), o);
  CHECK(a.value == b.value);
  REQUIRE(a.passes.size() == b.passes.size());
  for (std::size_t i = 0; i < a.passes.size(); i++)
  {
    CHECK(a.passes[i].record.predictions == b.passes[i].record.predictions);
  }
}

namespace
{

// Zeros of iota at lambda = +-1 and nowhere else: E^u = (2, lambda^2 - 1), E^s = (1, 0).
ProblemSpec TiedZeros()
{
  CMatrix m0(2, 2), m2 = CMatrix::Zero(2, 2), p0(2, 2);
  const CMatrix z = CMatrix::Zero(2, 2);
  m0 << 1, 0, -1, -1;
  m2(1, 0) = 1.0;
  p0 << -1, 0, 0, 1;
  ProblemSpec s;
  s.phase_dim = 2;
  s.a_minus = MatrixPencil(0.0, {m0, z, m2});
  s.a_plus = MatrixPencil(0.0, {p0, z, z});
  return s;
}

bool HasNote(const SpectralResult &r, const std::string &text)
{
  return std::any_of(r.notes.begin(), r.notes.end(),
                     [&](const std::string &n) { return n.find(text) != std::string::npos; });
}

}  // namespace

TEST_CASE("equidistant zeros: the anchor is perturbed to break the tie")
{
  const auto r = RunWithRestarts(TiedZeros(), Complex(0.0, 0.7));
  CHECK(HasNote(r, "oscillated"));
  CHECK(r.classification == Classification::Eigenvalue);
  CHECK(std::abs(std::abs(r.value.real()) - 1.0) < 1e-9);
  CHECK(std::abs(r.value.imag()) < 1e-9);
}

TEST_CASE("degenerate start where iota_1 vanishes")
{
  const auto r = RunWithRestarts(TiedZeros(), 0.0);
  CHECK(HasNote(r, "breakdown"));
  CHECK(r.converged);
  CHECK(std::abs(std::abs(r.value) - 1.0) < 1e-9);
}

TEST_CASE("a near start converges without perturbation")
{
  const auto r = RunWithRestarts(TiedZeros(), 0.1);
  CHECK(r.notes.empty());
  CHECK(std::abs(r.value - 1.0) < 1e-9);
}
