#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plim/atlas/atlas.hpp"
#include "plim/parallel/omp.hpp"

namespace plim {

struct BuildOptions {
  std::vector<BlockIndex> blocks;  // empty: every block of the spec
  std::uint64_t seed = 0;
  par::Exec exec = par::Exec::Parallel;
};

struct BuildReport {
  std::size_t attempted = 0;
  std::size_t solved = 0;
  std::size_t failed = 0;
  std::size_t degenerate = 0;
  std::vector<double> objectives;  // accepted sheets, generation order
  std::vector<std::string> failures;
};

/// One anchored solve of the generation plan.
struct SheetJob {
  BlockIndex block;
  Anchor anchor;
  std::uint64_t seed = 0;
};

/// Generation plan: every chosen corner of every block paired with every
/// anchor datum, in block-major order. Seeds derive from the base seed and
/// the job position only.
std::vector<SheetJob> plan_jobs(const AtlasSpec& spec, const BuildOptions& options);

/// Solves the jobs and inserts accepted sheets in plan order. Failed solves
/// are counted and left out. Serial and parallel execution give identical
/// atlases.
Atlas build_atlas(const AtlasSpec& spec, const GEquation& geq, const BuildOptions& options,
                  BuildReport* report = nullptr);

/// Adds solved sheets for extra jobs to an existing atlas.
BuildReport extend_atlas(Atlas& atlas, const GEquation& geq, const std::vector<SheetJob>& jobs, par::Exec exec);

}  // namespace plim
