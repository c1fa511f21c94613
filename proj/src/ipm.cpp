// SPDX-License-Identifier: Apache-2.0

#include "ptwise/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <Eigen/Eigenvalues>
#include "ptwise/errors.hpp"
#include "ptwise/subspace.hpp"

namespace ptwise
{

void IterationRecord::Compact()
{
  if (history.size() > 1)
  {
    history.erase(history.begin(), history.end() - 1);
  }
}

IterationRecord PowerIterate(const AssembledPencil &a, const Factorization &f,
                             const CVector &u_init, int max_iter, double tol,
                             const PassOptions &opts)
{
  IterationRecord rec;
  rec.base = a.BasePoint();
  const double n0 = u_init.norm();
  if (u_init.size() != a.Dim())
  {
    throw DimensionMismatch("initial vector has the wrong length");
  }
  if (!(n0 > 0.0))
  {
    throw Breakdown("zero initial vector");
  }
  rec.history.push_back(u_init / n0);
  rec.log_scales.push_back(0.0);
  const int m = a.Order();
  CVector rhs(a.Dim());
  for (int k = 1; k <= max_iter; k++)
  {
    rhs.setZero();
    const double lk1 = rec.log_scales[k - 1];
    for (int l = 1; l <= std::min(k, m); l++)
    {
      // Weight of the older iterate relative to u^(k-1).
      const double e = rec.log_scales[k - l] - lk1;
      if (e < -740.0)
      {
        continue;
      }
      rhs += std::exp(std::min(e, 700.0)) * a.Apply(l, rec.history[k - l]);
    }
    CVector w = f.Solve(rhs);
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw))
    {
      throw Breakdown("iterate " + std::to_string(k) + " vanished");
    }
    w /= -nw;
    const CVector &prev = rec.history[k - 1];
    const Complex ip = prev.dot(w);
    if (ip == 0.0)
    {
      throw Breakdown("consecutive iterates are orthogonal");
    }
    const Complex d = 1.0 / (nw * ip);
    rec.predictions.push_back(rec.base + d);
    rec.residuals.push_back((d * nw * w - prev).norm());
    rec.history.push_back(std::move(w));
    rec.log_scales.push_back(lk1 + std::log(nw));

    if (k >= std::max(2, opts.min_iter))
    {
      const Complex p = rec.predictions[k - 1];
      const double inc = std::abs(p - rec.predictions[k - 2]);
      if (inc <= tol * (1.0 + std::abs(p)) && rec.residuals.back() <= opts.residual_tol)
      {
        break;
      }
    }
  }
  return rec;
}

Complex PredictLambda(const IterationRecord &rec)
{
  if (rec.predictions.empty())
  {
    throw Error("no iterations recorded");
  }
  return rec.predictions.back();
}

namespace
{

// Least-squares slope of y against x.
double Slope(const std::vector<double> &x, const std::vector<double> &y)
{
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

Tail TailBehavior(const std::vector<Complex> &p)
{
  const int n = static_cast<int>(p.size());
  if (n < 12)
  {
    return Tail::Indeterminate;
  }
  const int start = std::max(2, n / 2);
  const double scale = 1.0 + std::abs(p.back());
  std::vector<double> k, lk, ld;
  for (int j = start; j < n; j++)
  {
    const double d = std::abs(p[j] - p[j - 1]);
    if (d <= 1e-12 * scale)
    {
      // Roundoff reached: only geometric convergence gets there this early.
      return Tail::Geometric;
    }
    k.push_back(j + 1.0);
    lk.push_back(std::log(j + 1.0));
    ld.push_back(std::log(d));
  }
  const std::size_t h = k.size() / 2;
  auto half = [&](const std::vector<double> &v, bool second)
  {
    return second ? std::vector<double>(v.begin() + h, v.end())
                  : std::vector<double>(v.begin(), v.begin() + h);
  };
  const double ka = Slope(half(k, false), half(ld, false));
  const double kb = Slope(half(k, true), half(ld, true));
  if (kb < 0.0 && std::abs(ka - kb) <= 0.2 * std::abs(kb))
  {
    return Tail::Geometric;
  }
  const double la = Slope(half(lk, false), half(ld, false));
  const double lb = Slope(half(lk, true), half(ld, true));
  if (la < -1.4 && la > -2.6 && lb < -1.4 && lb > -2.6 &&
      std::abs(la - lb) <= 0.2 * std::abs(lb))
  {
    return Tail::Algebraic;
  }
  return Tail::Indeterminate;
}

std::string ToString(Classification c)
{
  switch (c)
  {
    case Classification::Eigenvalue:
      return "eigenvalue";
    case Classification::Resonance:
      return "resonance";
    case Classification::BranchPoint:
      return "branch_point";
    case Classification::Unresolved:
      return "unresolved";
  }
  return "unresolved";
}

std::string ToString(Tail t)
{
  switch (t)
  {
    case Tail::Geometric:
      return "geometric";
    case Tail::Algebraic:
      return "algebraic";
    case Tail::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

double KernelResidual(const AssembledPencil &a, Complex lambda, const CVector &v)
{
  return a.ApplyEval(lambda, v).norm() / (v.norm() * a.ZeroOrderNorm());
}

Classification Classify(const IterationRecord &rec, const AssembledPencil &a, bool swapped,
                        double kernel_tol)
{
  if (rec.predictions.empty())
  {
    return Classification::Unresolved;
  }
  const Tail tail = TailBehavior(rec.predictions);
  if (tail == Tail::Algebraic)
  {
    return Classification::BranchPoint;
  }
  const double kr = KernelResidual(a, rec.predictions.back(), rec.history.back());
  if (kr <= kernel_tol && (tail == Tail::Geometric || rec.residuals.back() <= kernel_tol))
  {
    return swapped ? Classification::Resonance : Classification::Eigenvalue;
  }
  return Classification::Unresolved;
}

namespace
{

struct Side
{
  bool fixed = false;
  MatrixPencil pencil;
  SubspaceKind kind = SubspaceKind::Unstable;
  SubspaceJet jet;
  CMatrix basis;  // fixed boundary subspace

  bool Ascending() const { return kind == SubspaceKind::Stable; }

  MatrixPencil Series(Complex anchor, int order) const
  {
    return fixed ? MatrixPencil::Constant(basis, anchor) : BasisSeries(jet, order);
  }

  // Moves the jet to anchor: jet prediction polished by Newton, or continuation when the
  // polished subspace strays too far from the prediction.
  void Carry(Complex anchor, int order)
  {
    if (fixed)
    {
      return;
    }
    if (jet.base == anchor)
    {
      if (jet.Order() != order)
      {
        jet = TaylorJet(pencil, anchor, jet.frame, order, kind);
      }
      return;
    }
    try
    {
      const CMatrix upred = jet.Basis(anchor);
      const CMatrix u = NewtonRefine(pencil, anchor, upred);
      const CMatrix a = Eval(pencil, anchor);
      if (SubspaceAngle(upred, u) <= std::min(0.3, 0.25 * InvariantSeparation(a, u)))
      {
        jet = TaylorJet(pencil, anchor, AdaptedSchur(a, u, Ascending()), order, kind);
        return;
      }
    }
    catch (const Error &)
    {
    }
    SubspaceJet c = ContinueSubspaceRetry(pencil, jet, anchor);
    jet = c.Order() == order ? c : TaylorJet(pencil, anchor, c.frame, order, kind);
  }

  // True when the continued subspace at lambda is the spectrally sorted one.
  bool Sorted(Complex lambda) const
  {
    if (fixed)
    {
      return true;
    }
    try
    {
      const int split = jet.dim;
      const SortedSchur s = SortSchur(Eval(pencil, lambda), split, Ascending());
      return SubspaceAngle(s.q.leftCols(split), Orthonormalize(jet.Basis(lambda))) < 1e-6;
    }
    catch (const GapFailure &)
    {
      return true;
    }
  }
};

// The pass used its whole budget, its tail fits neither law and the late increments are
// no smaller than those half way through.
bool Oscillating(const IterationRecord &rec, int budget)
{
  const int n = rec.Iterations();
  if (n < budget || n < 8 || TailBehavior(rec.predictions) != Tail::Indeterminate)
  {
    return false;
  }
  auto inc = [&](int k) { return std::abs(rec.predictions[k] - rec.predictions[k - 1]); };
  double late = 0.0, mid = 0.0;
  for (int j = 0; j < 3; j++)
  {
    late += inc(n - 1 - j);
    mid += inc(n / 2 - j);
  }
  return late >= 0.5 * mid;
}

CVector RandomVector(std::mt19937_64 &rng, Eigen::Index n)
{
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; i++)
  {
    const double re = g(rng);
    v(i) = Complex(re, g(rng));
  }
  return v;
}

}  // namespace

SpectralResult RunWithRestarts(const ProblemSpec &spec, Complex start, const RunOptions &opts)
{
  SpectralResult res;
  const bool bvp = spec.IsBvp();
  const int m_first = opts.m > 0 ? opts.m : (bvp ? 40 : 200);
  const int first_iters = opts.first_pass_iters > 0 ? opts.first_pass_iters : m_first;
  const double fine = opts.fine_tol;

  Side left, right;
  left.pencil = spec.WorkingMinus();
  right.pencil = spec.WorkingPlus();
  const Eigen::Index nph = right.pencil.Rows();
  const Complex ref = spec.reference_point ? *spec.reference_point : DefaultReferencePoint(start);
  int k = 0;
  if (spec.left_basis)
  {
    k = static_cast<int>(spec.left_basis->cols());
    left.fixed = true;
    left.basis = *spec.left_basis;
  }
  else if (spec.unstable_dim)
  {
    k = *spec.unstable_dim;
  }
  else
  {
    k = MorseIndex(left.pencil, ref);
    if (MorseIndex(right.pencil, ref) != k)
    {
      throw Error("asymptotic Morse indices differ at the reference point");
    }
  }
  res.unstable_dim = k;
  left.kind = spec.swap_subspaces ? SubspaceKind::Stable : SubspaceKind::Unstable;
  right.kind = spec.swap_subspaces ? SubspaceKind::Unstable : SubspaceKind::Stable;

  Complex anchor = start;
  if (spec.seed_subspaces)
  {
    const auto &[sl, sr] = *spec.seed_subspaces;
    if (!left.fixed)
    {
      left.jet = TaylorJet(left.pencil, anchor,
                           AdaptedSchur(Eval(left.pencil, anchor), sl, left.Ascending()),
                           m_first, left.kind);
    }
    right.jet = TaylorJet(right.pencil, anchor,
                          AdaptedSchur(Eval(right.pencil, anchor), sr, right.Ascending()),
                          m_first, right.kind);
  }
  else
  {
    if (!left.fixed)
    {
      left.jet = TaylorJet(left.pencil, anchor, k, m_first, left.kind);
    }
    right.jet = TaylorJet(right.pencil, anchor, k, m_first, right.kind);
  }
  const Eigen::Index left_dim = left.fixed ? left.basis.cols() : left.jet.dim;
  if (left_dim + right.jet.dim != nph)
  {
    throw DimensionMismatch("boundary subspaces do not add up to the phase dimension");
  }

  std::vector<double> grid;
  std::vector<MatrixPencil> nodes;
  if (bvp)
  {
    grid = UniformGrid(spec.half_length, spec.intervals);
    for (double x : grid)
    {
      nodes.push_back(spec.WorkingInterior(x));
    }
  }
  auto assemble = [&](int order)
  {
    const MatrixPencil uu = left.Series(anchor, order), us = right.Series(anchor, order);
    return bvp ? AssembledPencil::Bvp(grid, nodes, uu, us) : AssembleConstant(uu, us);
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  // First pass.
  AssembledPencil a;
  IterationRecord first;
  bool started = false;
  for (int attempt = 0; attempt < 4 && !started; attempt++)
  {
    try
    {
      a = assemble(m_first);
      const Factorization f = FactorZeroOrder(a);
      first = PowerIterate(a, f, RandomVector(rng, a.Dim()), first_iters, opts.coarse_tol,
                           {opts.first_pass_min, std::numeric_limits<double>::infinity()});
      started = true;
    }
    catch (const SingularZeroOrder &)
    {
      anchor += 1e-3 * (1.0 + std::abs(anchor)) * std::polar(1.0, angle(rng));
      left.Carry(anchor, m_first);
      right.Carry(anchor, m_first);
      res.notes.push_back("singular start; anchor perturbed");
    }
    catch (const Breakdown &e)
    {
      // Degenerate start (for instance iota_1 = 0 there); constant maps break down anywhere.
      res.notes.push_back(std::string("breakdown: ") + e.what() + "; anchor perturbed");
      anchor += 1e-3 * (1.0 + std::abs(anchor)) * std::polar(1.0, angle(rng));
      left.Carry(anchor, m_first);
      right.Carry(anchor, m_first);
    }
  }
  if (!started)
  {
    res.value = anchor;
    res.lambda = spec.ToLambda(anchor);
    res.notes.push_back("no spectral value found: the iteration terminates");
    return res;
  }

  // Two values at the same distance: the budget runs out with increments that do not
  // shrink. A generic shift of the anchor breaks the tie.
  if (Oscillating(first, first_iters))
  {
    const Side keep_left = left, keep_right = right;
    const Complex keep_anchor = anchor;
    try
    {
      anchor += 1e-3 * (1.0 + std::abs(anchor)) * std::polar(1.0, angle(rng));
      left.Carry(anchor, m_first);
      right.Carry(anchor, m_first);
      a = assemble(m_first);
      IterationRecord retry =
          PowerIterate(a, FactorZeroOrder(a), RandomVector(rng, a.Dim()), first_iters,
                       opts.coarse_tol, {opts.first_pass_min, std::numeric_limits<double>::infinity()});
      res.notes.push_back("first pass oscillated; anchor perturbed");
      res.total_iterations += first.Iterations();
      first.Compact();
      res.passes.push_back({0, keep_anchor, std::move(first)});
      first = std::move(retry);
    }
    catch (const Error &)
    {
      left = keep_left;
      right = keep_right;
      anchor = keep_anchor;
      a = assemble(m_first);
    }
  }

  res.tail = TailBehavior(first.predictions);
  Complex lp = first.predictions.back();
  double last_res = first.residuals.back();
  double delta = first.Iterations() > 1
                     ? std::abs(lp - first.predictions[first.predictions.size() - 2])
                     : std::abs(lp - anchor);
  CVector v = first.history.back();
  res.total_iterations += first.Iterations();
  bool converged = delta <= fine * (1.0 + std::abs(lp)) && last_res <= fine;
  first.Compact();
  res.passes.push_back({0, anchor, std::move(first)});

  bool newton_tried = false;
  int restart = 0;
  double tau = opts.tau;
  while (!converged && opts.restarts && restart < opts.max_restarts)
  {
    if (!bvp && opts.newton_handoff && !newton_tried && res.tail == Tail::Algebraic &&
        delta < 1e-3 * (1.0 + std::abs(lp)))
    {
      newton_tried = true;
      // Candidate double roots: the closest eigenvalue pairs of A(lp).
      const Eigen::ComplexEigenSolver<CMatrix> es(Eval(right.pencil, lp), false);
      const CVector ev = es.eigenvalues();
      std::vector<std::pair<double, Complex>> pairs;
      for (Eigen::Index i = 0; i < ev.size(); i++)
      {
        for (Eigen::Index j = i + 1; j < ev.size(); j++)
        {
          pairs.push_back({std::abs(ev(i) - ev(j)), 0.5 * (ev(i) + ev(j))});
        }
      }
      std::sort(pairs.begin(), pairs.end(),
                [](const auto &x, const auto &y) { return x.first < y.first; });
      // Guards against a jump to an unrelated double root.
      const double reach = std::max(1e-2 * (1.0 + std::abs(lp)), 0.25 * std::abs(lp - anchor));
      for (std::size_t c = 0; c < std::min<std::size_t>(2, pairs.size()); c++)
      {
        try
        {
          BranchNewtonOptions no;
          no.nu_guess = pairs[c].second;
          const BranchPoint bp = BranchPointNewton(right.pencil, lp, no);
          if (std::abs(bp.lambda - lp) <= reach)
          {
            res.branch = bp;
            break;
          }
          res.notes.push_back("branch point Newton left the neighbourhood; ignored");
        }
        catch (const SingularJacobian &e)
        {
          res.notes.push_back(std::string("branch point Newton: ") + e.what());
          break;
        }
        catch (const Error &e)
        {
          res.notes.push_back(std::string("branch point Newton: ") + e.what());
        }
      }
      if (res.branch)
      {
        lp = res.branch->lambda;
        converged = true;
        break;
      }
    }
    restart++;
    const Complex next = anchor + tau * (lp - anchor);
    try
    {
      left.Carry(next, opts.m_fine);
      right.Carry(next, opts.m_fine);
    }
    catch (const Error &e)
    {
      res.notes.push_back(std::string("subspace transport failed: ") + e.what());
      break;
    }
    anchor = next;
    a = assemble(opts.m_fine);
    IterationRecord rec;
    try
    {
      const Factorization f = FactorZeroOrder(a);
      rec = PowerIterate(a, f, v, opts.m_fine, fine, {opts.min_iters, fine});
    }
    catch (const SingularZeroOrder &)
    {
      // The anchor itself sits on the singular point.
      lp = anchor;
      last_res = 0.0;
      converged = true;
      break;
    }
    catch (const Breakdown &e)
    {
      res.notes.push_back(std::string("breakdown: ") + e.what());
      break;
    }
    res.total_iterations += rec.Iterations();
    if (rec.residuals.back() > opts.coarse_tol && tau == opts.tau)
    {
      // The target lies beyond the reach of the series at this anchor (typically a nearby
      // singularity of the basis graphs): discard the pass and anchor next to lp.
      res.notes.push_back("pass " + std::to_string(restart) + " did not settle; anchor moved closer");
      rec.Compact();
      res.passes.push_back({restart, anchor, std::move(rec)});
      tau = 1.0 - 0.1 * (1.0 - opts.tau);
      continue;
    }
    tau = opts.tau;
    const Complex lnew = rec.predictions.back();
    const double inner = rec.Iterations() > 1
                             ? std::abs(lnew - rec.predictions[rec.predictions.size() - 2])
                             : std::abs(lnew - lp);
    delta = std::abs(lnew - lp);
    lp = lnew;
    last_res = rec.residuals.back();
    v = rec.history.back();
    rec.Compact();
    res.passes.push_back({restart, anchor, std::move(rec)});
    const double scale = fine * (1.0 + std::abs(lp));
    if (last_res <= fine && inner <= scale)
    {
      converged = true;
    }
    else if (delta <= scale && res.tail != Tail::Geometric)
    {
      converged = true;
    }
  }

  res.value = lp;
  res.lambda = spec.ToLambda(lp);
  if (spec.reparam)
  {
    res.gamma = lp;
  }
  res.converged = converged;
  res.restarts = restart;
  res.residual = last_res;
  res.kernel_vector = v;
  res.kernel_residual = KernelResidual(a, lp, v);
  // The truncated series is poor far from its anchor, so iota(lp) is rebuilt at lp and
  // its smallest singular value estimated by inverse iteration.
  if (converged && !res.branch)
  {
    const Complex from = anchor;
    try
    {
      anchor = lp;
      left.Carry(lp, 1);
      right.Carry(lp, 1);
      const AssembledPencil at = assemble(1);
      try
      {
        const Factorization f = FactorZeroOrder(at);
        CVector x = v / v.norm();
        double s = 0.0;
        for (int i = 0; i < 3; i++)
        {
          const CVector y = f.Solve(x);
          s = 1.0 / y.norm();
          x = y * s;
        }
        res.kernel_residual = s / at.ZeroOrderNorm();
        res.kernel_vector = x;
      }
      catch (const SingularZeroOrder &)
      {
        res.kernel_residual = 0.0;
      }
    }
    catch (const Error &)
    {
      // The subspaces may not be continuable onto lp itself (colliding spatial
      // eigenvalues); a short pass anchored next to it evaluates iota(lp) accurately.
      try
      {
        anchor = lp + 1e-4 * (from - lp);
        left.Carry(anchor, opts.m_fine);
        right.Carry(anchor, opts.m_fine);
        const AssembledPencil at = assemble(opts.m_fine);
        const Factorization f = FactorZeroOrder(at);
        const IterationRecord rec =
            PowerIterate(at, f, RandomVector(rng, at.Dim()), opts.m_fine, fine, {});
        res.kernel_vector = rec.history.back();
        res.kernel_residual = KernelResidual(at, lp, res.kernel_vector);
      }
      catch (const Error &e)
      {
        res.notes.push_back(std::string("kernel check at the final value failed: ") +
                            e.what());
      }
    }
  }
  if (res.branch)
  {
    res.classification = Classification::BranchPoint;
  }
  else if (!converged)
  {
    res.classification = Classification::Unresolved;
  }
  else if (res.tail == Tail::Algebraic)
  {
    res.classification = Classification::BranchPoint;
  }
  else if (last_res <= fine && res.kernel_residual <= 1e2 * fine)
  {
    const bool resonance =
        spec.swap_subspaces || !left.Sorted(lp) || !right.Sorted(lp);
    res.classification = resonance ? Classification::Resonance : Classification::Eigenvalue;
  }
  else if (res.tail != Tail::Geometric)
  {
    res.classification = Classification::BranchPoint;
  }
  else
  {
    res.classification = Classification::Unresolved;
  }
  return res;
}

}  // namespace ptwise
