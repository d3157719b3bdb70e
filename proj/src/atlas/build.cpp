#include "plim/atlas/build.hpp"

#include <optional>

namespace plim {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<SheetJob> plan_jobs(const AtlasSpec& spec, const BuildOptions& options) {
  spec.validate();
  std::vector<BlockIndex> blocks = options.blocks;
  if (blocks.empty()) blocks = Atlas(spec).all_blocks();
  std::vector<SheetJob> jobs;
  for (const BlockIndex& b : blocks) {
    for (const Vec& corner : spec.anchor_points(b)) {
      for (const Vec& data : spec.anchor_data) {
        jobs.push_back({b, Anchor{corner, data}, mix(options.seed, jobs.size())});
      }
    }
  }
  return jobs;
}

BuildReport extend_atlas(Atlas& atlas, const GEquation& geq, const std::vector<SheetJob>& jobs, par::Exec exec) {
  const AtlasSpec& spec = atlas.spec();
  std::vector<std::optional<Sheet>> out(jobs.size());
  std::vector<std::string> errors(jobs.size());

  par::for_each_index(
      exec, static_cast<std::ptrdiff_t>(jobs.size()),
      [&](std::ptrdiff_t i) {
        const SheetJob& job = jobs[static_cast<std::size_t>(i)];
        const BlockGeometry geom = spec.geometry(job.block);
        GSolveConfig cfg = spec.gsolve;
        cfg.anneal.seed = job.seed;
        try {
          LsfemProblem problem(job.block, geom, geq, job.anchor, cfg.mode, cfg.gauss,
                               cfg.w_anchor_scale * geom.measure());
          out[static_cast<std::size_t>(i)] = solve_sheet(problem, cfg);
        } catch (const SolverFailed& e) {
          errors[static_cast<std::size_t>(i)] = e.what();
        }
      },
      /*dynamic=*/true);

  BuildReport rep;
  rep.attempted = jobs.size();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!out[i]) {
      ++rep.failed;
      rep.failures.push_back(errors[i]);
      continue;
    }
    if (out[i]->degenerate) ++rep.degenerate;
    rep.objectives.push_back(out[i]->objective);
    atlas.add_sheet(std::move(*out[i]));
    ++rep.solved;
  }
  return rep;
}

Atlas build_atlas(const AtlasSpec& spec, const GEquation& geq, const BuildOptions& options, BuildReport* report) {
  Atlas atlas(spec);
  BuildReport rep = extend_atlas(atlas, geq, plan_jobs(spec, options), options.exec);
  if (report) *report = std::move(rep);
  return atlas;
}

}  // namespace plim
