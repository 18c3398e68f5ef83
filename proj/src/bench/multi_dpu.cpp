#include "pimstm/bench/multi_dpu.hpp"

namespace pimstm::bench {

MultiDpuKMeansResult multi_dpu_kmeans(int dpus, const KMeansConfig& cfg, const std::vector<std::uint32_t>& points,
                                      const RunOptions& options) {
  if (dpus < 1) throw Error(ErrorCode::kConfigInvalid, "multi-dpu: need at least one DPU");
  const std::size_t per_dpu_words = points.size() / static_cast<std::size_t>(dpus);
  if (per_dpu_words * dpus != points.size() || per_dpu_words % cfg.dims != 0) {
    throw Error(ErrorCode::kConfigInvalid, "multi-dpu: points do not split evenly across DPUs");
  }
  KMeansConfig shard_cfg = cfg;
  shard_cfg.rounds = 1;
  const std::uint32_t acc_words = cfg.k * (cfg.dims + 1);

  MultiDpuKMeansResult out;
  out.centroids.assign(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(cfg.k * cfg.dims));
  for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
    std::vector<std::uint32_t> merged(acc_words, 0);
    for (int d = 0; d < dpus; ++d) {
      const auto first = points.begin() + static_cast<std::ptrdiff_t>(per_dpu_words * d);
      KMeans shard(shard_cfg, std::vector<std::uint32_t>(first, first + static_cast<std::ptrdiff_t>(per_dpu_words)),
                   out.centroids);
      RunResult res = run_workload(shard, options);
      out.stats += res.stats;
      for (auto& p : res.problems) out.problems.push_back("dpu " + std::to_string(d) + ": " + p);
      const auto& acc = shard.round_accumulators().front();
      for (std::uint32_t i = 0; i < acc_words; ++i) merged[i] += acc[i];
    }
    out.centroids = centroids_from(merged, out.centroids, cfg.k, cfg.dims);
    out.accumulators = std::move(merged);
  }
  out.total_count = 0;
  for (std::uint32_t c = 0; c < cfg.k; ++c) out.total_count += out.accumulators[c * (cfg.dims + 1) + cfg.dims];
  return out;
}

MultiDpuLabyrinthResult multi_dpu_labyrinth(const std::vector<LabyrinthInstance>& instances,
                                            const RunOptions& options) {
  MultiDpuLabyrinthResult out;
  for (std::size_t d = 0; d < instances.size(); ++d) {
    Labyrinth lab(instances[d]);
    RunResult res = run_workload(lab, options);
    out.stats += res.stats;
    out.routed.push_back(lab.routed());
    out.processed.push_back(lab.processed());
    for (auto& p : res.problems) out.problems.push_back("dpu " + std::to_string(d) + ": " + p);
  }
  return out;
}

}  // namespace pimstm::bench
