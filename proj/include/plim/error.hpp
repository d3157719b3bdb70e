#pragma once

#include <stdexcept>
#include <string>

namespace plim {

enum class ErrorKind {
  Precondition,
  IntegrationDiverged,
  PrunedRegion,
  OutOfDomain,
  NoCandidate,
  MissingSheet,
  UnresolvableSingularity,
  SolverFailed,
  CorruptFile,
  VersionMismatch,
  Config,
  UnknownSystem,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Throws Precondition when cond is false.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorKind::Precondition, what);
}

}  // namespace plim
