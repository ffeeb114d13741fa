#ifndef ATMOS_ERRORS_HPP
#define ATMOS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace atmos
{

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument lies outside the domain of the operation.
class DomainError : public Error
{
public:
  using Error::Error;
};

/// A perturbation state violates 1+y > 0, 1+y+v > 0 or |y|+|v| < 1.
class StateError : public Error
{
public:
  using Error::Error;
};

/// An iterative numerical method did not reach its tolerance.
class NumericError : public Error
{
public:
  NumericError(const std::string& what, double residual)
      : Error(what + " (achieved residual " + std::to_string(residual) + ")"), residual_(residual)
  {
  }
  explicit NumericError(const std::string& what) : Error(what) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_ = 0.0;
};

class GridError : public Error
{
public:
  using Error::Error;
};

/// Requested differentiation/expansion order exceeds what the data supports.
class OrderError : public Error
{
public:
  using Error::Error;
};

class BracketError : public Error
{
public:
  using Error::Error;
};

class IntegrationError : public Error
{
public:
  IntegrationError(const std::string& what, double location)
      : Error(what + " at " + std::to_string(location)), location_(location)
  {
  }

  double location() const noexcept { return location_; }

private:
  double location_;
};

class StabilityError : public Error
{
public:
  using Error::Error;
};

class AccuracyError : public Error
{
public:
  using Error::Error;
};

class SymmetryError : public Error
{
public:
  using Error::Error;
};

class InsufficientDataError : public Error
{
public:
  using Error::Error;
};

/// Physical radius is not monotone in the Lagrangian label (particle crossing).
class MappingError : public Error
{
public:
  using Error::Error;
};

/// Simulation left the admissible set or produced a non-finite value.
class AdmissibilityError : public Error
{
public:
  AdmissibilityError(const std::string& what, double time)
      : Error(what + " at t=" + std::to_string(time)), time_(time)
  {
  }

  double time() const noexcept { return time_; }

private:
  double time_;
};

class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace atmos

#endif
