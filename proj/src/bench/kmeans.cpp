#include "pimstm/bench/kmeans.hpp"

#include <random>

namespace pimstm::bench {

KMeansConfig KMeansConfig::low_contention() { return KMeansConfig{}; }

KMeansConfig KMeansConfig::high_contention() {
  KMeansConfig c;
  c.k = 2;
  return c;
}

std::vector<std::uint32_t> generate_points(const KMeansConfig& cfg, std::uint32_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> cd(0, cfg.coord_limit - 1);
  std::vector<std::uint32_t> pts(static_cast<std::size_t>(count) * cfg.dims);
  for (auto& v : pts) v = cd(rng);
  return pts;
}

std::uint32_t nearest_centroid(const std::uint32_t* point, const std::vector<std::uint32_t>& centroids,
                               std::uint32_t k, std::uint32_t dims) {
  std::uint32_t best = 0;
  std::uint64_t best_d = UINT64_MAX;
  for (std::uint32_t c = 0; c < k; ++c) {
    std::uint64_t d = 0;
    for (std::uint32_t j = 0; j < dims; ++j) {
      const std::int64_t diff = static_cast<std::int64_t>(point[j]) - centroids[c * dims + j];
      d += static_cast<std::uint64_t>(diff * diff);
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::uint32_t> centroids_from(const std::vector<std::uint32_t>& acc,
                                          const std::vector<std::uint32_t>& previous, std::uint32_t k,
                                          std::uint32_t dims) {
  std::vector<std::uint32_t> out = previous;
  for (std::uint32_t c = 0; c < k; ++c) {
    const std::uint32_t count = acc[c * (dims + 1) + dims];
    if (count == 0) continue;
    for (std::uint32_t j = 0; j < dims; ++j) out[c * dims + j] = acc[c * (dims + 1) + j] / count;
  }
  return out;
}

namespace {

std::vector<std::uint32_t> first_points(const KMeansConfig& cfg, const std::vector<std::uint32_t>& points) {
  if (points.size() < static_cast<std::size_t>(cfg.k) * cfg.dims) {
    throw Error(ErrorCode::kConfigInvalid, "kmeans: fewer points than clusters");
  }
  return {points.begin(), points.begin() + static_cast<std::ptrdiff_t>(cfg.k * cfg.dims)};
}

}  // namespace

KMeans::KMeans(KMeansConfig cfg, std::vector<std::uint32_t> points)
    : KMeans(cfg, points, first_points(cfg, points)) {}

KMeans::KMeans(KMeansConfig cfg, std::vector<std::uint32_t> points, std::vector<std::uint32_t> centroids)
    : cfg_(cfg), points_(std::move(points)), centroids_(std::move(centroids)) {
  if (cfg_.k == 0 || cfg_.dims == 0 || cfg_.rounds == 0) {
    throw Error(ErrorCode::kConfigInvalid, "kmeans: k, dims and rounds must be positive");
  }
  if (points_.size() % cfg_.dims != 0 || centroids_.size() != static_cast<std::size_t>(cfg_.k) * cfg_.dims) {
    throw Error(ErrorCode::kConfigInvalid, "kmeans: point or centroid array has the wrong shape");
  }
  // Sums must fit a 32-bit accumulator word.
  if (static_cast<std::uint64_t>(points_.size() / cfg_.dims) * cfg_.coord_limit > UINT32_MAX) {
    throw Error(ErrorCode::kConfigInvalid, "kmeans: too many points for 32-bit accumulators");
  }
  count_ = static_cast<std::uint32_t>(points_.size() / cfg_.dims);
}

std::string KMeans::name() const { return "kmeans"; }

StmConfig KMeans::size(StmConfig cfg) const {
  cfg.readset_capacity = cfg_.dims + 1 + 8;
  cfg.writeset_capacity = cfg_.dims + 1 + 8;
  const std::uint32_t words = static_cast<std::uint32_t>(points_.size() + centroids_.size()) + acc_words();
  cfg.heap_bytes = (words * 4 + 64 + 4095) & ~4095u;
  return cfg;
}

void KMeans::setup(Stm& stm) {
  points_addr_ = stm.heap_alloc(static_cast<std::uint32_t>(points_.size() * 4));
  centroids_addr_ = stm.heap_alloc(static_cast<std::uint32_t>(centroids_.size() * 4));
  acc_addr_ = stm.heap_alloc(acc_words() * 4);
  for (std::size_t i = 0; i < points_.size(); ++i) stm.host_store(points_addr_ + 4 * static_cast<std::uint32_t>(i), points_[i]);
  for (std::size_t i = 0; i < centroids_.size(); ++i) {
    stm.host_store(centroids_addr_ + 4 * static_cast<std::uint32_t>(i), centroids_[i]);
  }
  round_acc_.clear();
}

void KMeans::begin_round(Stm& stm, int) {
  for (std::uint32_t i = 0; i < acc_words(); ++i) stm.host_store(acc_addr_ + 4 * i, 0);
}

void KMeans::tasklet_main(Transaction& tx, int) {
  const std::uint32_t dims = cfg_.dims;
  std::vector<std::uint32_t> centroids(centroids_.size());
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    centroids[i] = tx.raw_load(centroids_addr_ + 4 * static_cast<std::uint32_t>(i));
  }
  std::vector<std::uint32_t> point(dims);
  const auto tasklets = static_cast<std::uint32_t>(tx.stm().tasklets());
  for (std::uint32_t p = static_cast<std::uint32_t>(tx.tasklet()); p < count_; p += tasklets) {
    for (std::uint32_t j = 0; j < dims; ++j) point[j] = tx.raw_load(points_addr_ + 4 * (p * dims + j));
    const std::uint32_t c = nearest_centroid(point.data(), centroids, cfg_.k, dims);
    const std::uint32_t row = acc_addr_ + 4 * c * (dims + 1);
    tx.run([&](Transaction& x) {
      for (std::uint32_t j = 0; j < dims; ++j) x.store(row + 4 * j, x.load(row + 4 * j) + point[j]);
      x.store(row + 4 * dims, x.load(row + 4 * dims) + 1);
    });
  }
}

void KMeans::end_round(Stm& stm, int) {
  std::vector<std::uint32_t> acc(acc_words());
  for (std::uint32_t i = 0; i < acc_words(); ++i) acc[i] = stm.host_load(acc_addr_ + 4 * i);
  centroids_ = centroids_from(acc, centroids_, cfg_.k, cfg_.dims);
  for (std::size_t i = 0; i < centroids_.size(); ++i) {
    stm.host_store(centroids_addr_ + 4 * static_cast<std::uint32_t>(i), centroids_[i]);
  }
  round_acc_.push_back(std::move(acc));
}

std::vector<std::string> KMeans::verify(Stm&) {
  std::vector<std::string> problems;
  std::vector<std::uint64_t> dim_sums(cfg_.dims, 0);
  for (std::uint32_t p = 0; p < count_; ++p) {
    for (std::uint32_t j = 0; j < cfg_.dims; ++j) dim_sums[j] += points_[p * cfg_.dims + j];
  }
  for (std::size_t r = 0; r < round_acc_.size(); ++r) {
    const auto& acc = round_acc_[r];
    std::uint64_t total = 0;
    std::vector<std::uint64_t> sums(cfg_.dims, 0);
    for (std::uint32_t c = 0; c < cfg_.k; ++c) {
      total += acc[c * (cfg_.dims + 1) + cfg_.dims];
      for (std::uint32_t j = 0; j < cfg_.dims; ++j) sums[j] += acc[c * (cfg_.dims + 1) + j];
    }
    const std::string tag = "round " + std::to_string(r) + ": ";
    if (total != count_) {
      problems.push_back(tag + "assigned " + std::to_string(total) + " of " + std::to_string(count_) + " points");
    }
    if (sums != dim_sums) problems.push_back(tag + "coordinate sums not conserved");
  }
  return problems;
}

}  // namespace pimstm::bench
