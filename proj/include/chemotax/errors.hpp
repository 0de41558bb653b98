#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace chemotax {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or input. The CLI maps these to exit status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Files that cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Failures raised while integrating a model. The CLI maps these to exit status 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ProbabilityOverflow : public NumericalError {
 public:
  ProbabilityOverflow(std::string process, std::size_t site, std::int64_t step, double total)
      : NumericalError(process + " move probabilities sum to " + std::to_string(total) +
                       " > 1 at site " + std::to_string(site) + ", step " + std::to_string(step)),
        process_(std::move(process)),
        site_(site),
        step_(step),
        total_(total) {}

  const std::string& process() const noexcept { return process_; }
  std::size_t site() const noexcept { return site_; }
  std::int64_t step() const noexcept { return step_; }
  double total() const noexcept { return total_; }

 private:
  std::string process_;
  std::size_t site_;
  std::int64_t step_;
  double total_;
};

class NewtonDivergence : public NumericalError {
 public:
  NewtonDivergence(int iterations, double residual)
      : NumericalError("Newton iteration did not converge after " + std::to_string(iterations) +
                       " iterations (last scaled residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class CflViolation : public NumericalError {
 public:
  CflViolation(double dt, double bound)
      : NumericalError("explicit step dt=" + std::to_string(dt) +
                       " exceeds stability estimate " + std::to_string(bound)),
        dt_(dt),
        bound_(bound) {}

  double dt() const noexcept { return dt_; }
  double bound() const noexcept { return bound_; }

 private:
  double dt_;
  double bound_;
};

}  // namespace chemotax
