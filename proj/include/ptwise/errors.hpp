// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_ERRORS_HPP
#define PTWISE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ptwise
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Two sorted eigenvalues at the split position coincide; the subspace is not uniquely
// continued from this point.
class GapFailure : public Error
{
public:
  using Error::Error;
};

class SylvesterSingular : public Error
{
public:
  using Error::Error;
};

class NoConvergence : public Error
{
public:
  using Error::Error;
};

class PathFailure : public Error
{
public:
  using Error::Error;
};

class SingularZeroOrder : public Error
{
public:
  using Error::Error;
};

class Breakdown : public Error
{
public:
  using Error::Error;
};

class SingularJacobian : public Error
{
public:
  SingularJacobian(const std::string &what, double best_lambda_re, double best_lambda_im)
    : Error(what), best_re(best_lambda_re), best_im(best_lambda_im)
  {
  }
  double best_re, best_im;
};

class UnknownProblem : public Error
{
public:
  using Error::Error;
};

class DimensionMismatch : public Error
{
public:
  using Error::Error;
};

}  // namespace ptwise

#endif  // PTWISE_ERRORS_HPP
