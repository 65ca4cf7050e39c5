#pragma once

#include <stdexcept>
#include <string>

namespace acdyn {

// A scalar or linear solve failed to converge (malformed graph, infeasible data).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation point outside the effective domain of a graph.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Input data violates a standing assumption of the model.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string label, const std::string& what)
      : std::invalid_argument(what), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

}  // namespace acdyn
