#include "plim/error.hpp"

namespace plim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Precondition: return "precondition violated";
    case ErrorKind::IntegrationDiverged: return "integration diverged";
    case ErrorKind::PrunedRegion: return "pruned region";
    case ErrorKind::OutOfDomain: return "out of domain";
    case ErrorKind::NoCandidate: return "no candidate sheet";
    case ErrorKind::MissingSheet: return "missing sheet";
    case ErrorKind::UnresolvableSingularity: return "unresolvable singularity";
    case ErrorKind::SolverFailed: return "solver failed";
    case ErrorKind::CorruptFile: return "corrupt file";
    case ErrorKind::VersionMismatch: return "version mismatch";
    case ErrorKind::Config: return "config error";
    case ErrorKind::UnknownSystem: return "unknown system";
  }
  return "error";
}

}  // namespace plim
