#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jchmf {

/// Input violates a documented precondition (non-symmetric matrix, bad parameter).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative eigensolver exhausted its iteration budget.
class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(const std::string& what, std::size_t iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

private:
  std::size_t iterations_;
};

/// The ground state leaks into the top Fock level: n_max is too small for this psi.
class TruncationOverflow : public std::runtime_error {
public:
  TruncationOverflow(double psi, double top_probability, double guard)
      : std::runtime_error("truncation overflow at psi=" + std::to_string(psi) +
                           ": top Fock level probability " + std::to_string(top_probability) +
                           " exceeds guard " + std::to_string(guard)),
        psi_(psi), top_probability_(top_probability) {}

  double psi() const noexcept { return psi_; }
  double top_probability() const noexcept { return top_probability_; }

private:
  double psi_;
  double top_probability_;
};

/// A sweep cell failed; carries the grid coordinate.
class SweepCellError : public std::runtime_error {
public:
  SweepCellError(std::size_t mu_index, std::size_t k_index, double mu, double k,
                 const std::string& cause)
      : std::runtime_error("sweep cell (" + std::to_string(mu_index) + ", " +
                           std::to_string(k_index) + ") mu=" + std::to_string(mu) +
                           " k=" + std::to_string(k) + ": " + cause),
        mu_index_(mu_index), k_index_(k_index) {}

  std::size_t mu_index() const noexcept { return mu_index_; }
  std::size_t k_index() const noexcept { return k_index_; }

private:
  std::size_t mu_index_;
  std::size_t k_index_;
};

class EmptyBoundary : public std::runtime_error {
public:
  EmptyBoundary() : std::runtime_error("no MI->SF crossing anywhere in the sweep") {}
};

/// Malformed or incomplete configuration file.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace jchmf
