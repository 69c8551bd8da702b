#pragma once
#include <stdexcept>
#include <string>
#include <utility>

namespace af {

// kind is the stable machine-readable tag the CLI emits in its error JSON.
struct Error : std::runtime_error {
  Error(std::string k, const std::string& msg) : std::runtime_error(msg), kind(std::move(k)) {}
  std::string kind;
};

// Invalid parameters or violated preconditions. CLI exit code 2.
struct DomainError : Error {
  explicit DomainError(const std::string& msg, std::string k = "DomainError")
      : Error(std::move(k), msg) {}
};
struct CenterOutside : DomainError {
  explicit CenterOutside(const std::string& m) : DomainError(m, "CenterOutside") {}
};
struct OutOfRange : DomainError {
  explicit OutOfRange(const std::string& m) : DomainError(m, "OutOfRange") {}
};
struct ModeMismatch : DomainError {
  explicit ModeMismatch(const std::string& m) : DomainError(m, "ModeMismatch") {}
};

// Numerical failures. CLI exit code 3.
struct SolverError : Error {
  explicit SolverError(const std::string& msg, std::string k = "SolverError")
      : Error(std::move(k), msg) {}
};
struct ConvexityLost : SolverError {
  explicit ConvexityLost(const std::string& m) : SolverError(m, "ConvexityLost") {}
};
struct IntegrationFailed : SolverError {
  explicit IntegrationFailed(const std::string& m) : SolverError(m, "IntegrationFailed") {}
};
struct RootNotBracketed : SolverError {
  explicit RootNotBracketed(const std::string& m) : SolverError(m, "RootNotBracketed") {}
};
struct SolverFailure : SolverError {
  explicit SolverFailure(const std::string& m) : SolverError(m, "SolverFailure") {}
};
struct LinearSolveFailure : SolverError {
  explicit LinearSolveFailure(const std::string& m) : SolverError(m, "LinearSolveFailure") {}
};
struct OptimizerFailed : SolverError {
  explicit OptimizerFailed(const std::string& m) : SolverError(m, "OptimizerFailed") {}
};
struct Extinction : SolverError {
  explicit Extinction(const std::string& m) : SolverError(m, "Extinction") {}
};
struct ContractionDiverged : SolverError {
  explicit ContractionDiverged(const std::string& m) : SolverError(m, "ContractionDiverged") {}
};
struct ResonanceError : SolverError {
  explicit ResonanceError(const std::string& m) : SolverError(m, "ResonanceError") {}
};
struct InsufficientDecay : SolverError {
  explicit InsufficientDecay(const std::string& m) : SolverError(m, "InsufficientDecay") {}
};
struct DegenerateSamples : SolverError {
  explicit DegenerateSamples(const std::string& m) : SolverError(m, "DegenerateSamples") {}
};

}  // namespace af
