#pragma once

#include <vector>

#include "pimstm/bench/kmeans.hpp"
#include "pimstm/bench/labyrinth.hpp"

namespace pimstm::bench {

struct MultiDpuKMeansResult {
  std::vector<std::uint32_t> centroids;
  // Merged accumulators of the last round.
  std::vector<std::uint32_t> accumulators;
  std::uint64_t total_count = 0;
  Stats stats;
  std::vector<std::string> problems;
};

// Shard d holds points [d * per_dpu, (d + 1) * per_dpu) of the concatenated
// set; centroids start at its first k points. Each round every DPU runs
// KMeans on its shard, then the host adds the accumulators in DPU-id order and
// recomputes the centroids.
MultiDpuKMeansResult multi_dpu_kmeans(int dpus, const KMeansConfig& cfg, const std::vector<std::uint32_t>& points,
                                      const RunOptions& options);

struct MultiDpuLabyrinthResult {
  std::vector<std::uint32_t> routed;
  std::vector<std::uint32_t> processed;
  Stats stats;
  std::vector<std::string> problems;
};

// One independent instance per DPU.
MultiDpuLabyrinthResult multi_dpu_labyrinth(const std::vector<LabyrinthInstance>& instances,
                                            const RunOptions& options);

}  // namespace pimstm::bench
