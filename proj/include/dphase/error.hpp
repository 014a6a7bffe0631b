#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dphase
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error
{
public:
  using Error::Error;
};

class InvalidWeight : public Error
{
public:
  using Error::Error;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

class DomainError : public Error
{
public:
  using Error::Error;
};

class NumericError : public Error
{
public:
  using Error::Error;
};

/// Operation invoked in the wrong exponent regime (p<q vs q<p).
class RegimeError : public Error
{
public:
  using Error::Error;
};

class PositivityError : public Error
{
public:
  using Error::Error;
};

/// Raised when a quotient or constraint needs ∫ m |u|^s > 0 and it is not.
class IndefiniteConstraint : public Error
{
public:
  using Error::Error;
};

/// A solver stagnated. The best iterate found is attached.
class NoConvergence : public Error
{
public:
  NoConvergence(const std::string &what, std::vector<double> best, double bestResidual)
    : Error(what), best_(std::move(best)), bestResidual_(bestResidual)
  {
  }

  const std::vector<double> &bestIterate() const { return best_; }
  double bestResidual() const { return bestResidual_; }

private:
  std::vector<double> best_;
  double bestResidual_;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

} // namespace dphase
