#pragma once

#include <vector>

#include "pimstm/bench/workload.hpp"

namespace pimstm::bench {

struct KMeansConfig {
  std::uint32_t k = 15;
  std::uint32_t dims = 14;
  std::uint32_t points = 10'000;
  std::uint32_t rounds = 3;
  // Coordinates are integers in [0, coord_limit).
  std::uint32_t coord_limit = 1024;

  static KMeansConfig low_contention();
  static KMeansConfig high_contention();
};

// Row-major points, `dims` coordinates each.
std::vector<std::uint32_t> generate_points(const KMeansConfig& cfg, std::uint32_t count, std::uint64_t seed);

// Closest centroid by squared Euclidean distance; ties go to the lowest id.
std::uint32_t nearest_centroid(const std::uint32_t* point, const std::vector<std::uint32_t>& centroids,
                               std::uint32_t k, std::uint32_t dims);

// Accumulators hold, per cluster, `dims` coordinate sums followed by a count.
// New centroid = floor(sum / count); an empty cluster keeps its centroid.
std::vector<std::uint32_t> centroids_from(const std::vector<std::uint32_t>& accumulators,
                                          const std::vector<std::uint32_t>& previous, std::uint32_t k,
                                          std::uint32_t dims);

class KMeans final : public Workload {
 public:
  // Centroids start at the first k points.
  KMeans(KMeansConfig cfg, std::vector<std::uint32_t> points);
  KMeans(KMeansConfig cfg, std::vector<std::uint32_t> points, std::vector<std::uint32_t> centroids);

  std::string name() const override;
  StmConfig size(StmConfig cfg) const override;
  void setup(Stm& stm) override;
  int rounds() const override { return static_cast<int>(cfg_.rounds); }
  void begin_round(Stm& stm, int round) override;
  void tasklet_main(Transaction& tx, int round) override;
  void end_round(Stm& stm, int round) override;
  std::vector<std::string> verify(Stm& stm) override;

  const KMeansConfig& config() const { return cfg_; }
  // Accumulators at the end of each round.
  const std::vector<std::vector<std::uint32_t>>& round_accumulators() const { return round_acc_; }
  const std::vector<std::uint32_t>& centroids() const { return centroids_; }

 private:
  std::uint32_t acc_words() const { return cfg_.k * (cfg_.dims + 1); }

  KMeansConfig cfg_;
  std::vector<std::uint32_t> points_;
  std::vector<std::uint32_t> centroids_;
  std::uint32_t count_ = 0;
  std::uint32_t points_addr_ = 0;
  std::uint32_t centroids_addr_ = 0;
  std::uint32_t acc_addr_ = 0;
  std::vector<std::vector<std::uint32_t>> round_acc_;
};

}  // namespace pimstm::bench
