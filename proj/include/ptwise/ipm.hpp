// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_IPM_HPP
#define PTWISE_IPM_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>
#include "ptwise/assembly.hpp"
#include "ptwise/newton.hpp"

namespace ptwise
{

// One pass of the pencil power iteration. history[j] is u^(j) / ||u^(j)|| for j = 0..k and
// u^(j) = exp(log_scales[j]) history[j]; predictions[j-1] and residuals[j-1] come from the
// pair (u^(j-1), u^(j)).
struct IterationRecord
{
  Complex base = 0.0;
  std::vector<CVector> history;
  std::vector<double> log_scales;
  std::vector<Complex> predictions;
  std::vector<double> residuals;

  int Iterations() const { return static_cast<int>(predictions.size()); }
  // Drops the stored vectors except the last.
  void Compact();
};

struct PassOptions
{
  int min_iter = 1;
  // Residual bound required next to the increment test; infinite disables it.
  double residual_tol = std::numeric_limits<double>::infinity();
};

// Runs at most max_iter steps of u^(k) = -iota_0^{-1} sum_l iota_l u^(k-l), l <= min(k, M).
// Stops once |lambda_k - lambda_{k-1}| <= tol (1 + |lambda_k|) after min_iter steps (and
// the residual test). Throws Breakdown when an iterate vanishes.
IterationRecord PowerIterate(const AssembledPencil &a, const Factorization &f,
                             const CVector &u_init, int max_iter, double tol,
                             const PassOptions &opts = {});

// Prediction from the last two iterates.
Complex PredictLambda(const IterationRecord &rec);

enum class Tail
{
  Geometric,
  Algebraic,
  Indeterminate
};

Tail TailBehavior(const std::vector<Complex> &predictions);

enum class Classification
{
  Eigenvalue,
  Resonance,
  BranchPoint,
  Unresolved
};

std::string ToString(Classification c);
std::string ToString(Tail t);

// ||iota(lambda) v|| / (||v|| sqrt(||iota_0||_1 ||iota_0||_inf)).
double KernelResidual(const AssembledPencil &a, Complex lambda, const CVector &v);

// Classification of a finished pass from its tail and kernel residual.
Classification Classify(const IterationRecord &rec, const AssembledPencil &a,
                        bool swapped, double kernel_tol = 1e-9);

struct RunOptions
{
  int m = -1;  // first-pass order; 40 for BVPs and 200 otherwise when negative
  int m_fine = 8;
  double tau = 0.9;
  double coarse_tol = 1e-3;
  double fine_tol = 1e-9;
  int max_restarts = 60;
  std::uint64_t seed = 1;
  int first_pass_iters = -1;  // m when negative
  int first_pass_min = 20;
  int min_iters = 5;
  bool restarts = true;
  bool newton_handoff = true;
};

struct PassSummary
{
  int restart_index = 0;
  Complex anchor = 0.0;
  IterationRecord record;
};

struct SpectralResult
{
  // In the working parameter (gamma under a reparametrization).
  Complex value = 0.0;
  Complex lambda = 0.0;
  std::optional<Complex> gamma;
  Classification classification = Classification::Unresolved;
  Tail tail = Tail::Indeterminate;
  bool converged = false;
  int restarts = 0;
  int total_iterations = 0;
  double residual = 0.0;
  double kernel_residual = 0.0;
  int unstable_dim = 0;
  CVector kernel_vector;
  std::vector<PassSummary> passes;
  std::optional<BranchPoint> branch;
  std::vector<std::string> notes;
};

// Nearest pointwise spectral value to start (working parameter) with restarts.
SpectralResult RunWithRestarts(const ProblemSpec &spec, Complex start,
                               const RunOptions &opts = {});

}  // namespace ptwise

#endif  // PTWISE_IPM_HPP
