#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "pimstm/bench/workload.hpp"

namespace pimstm::bench {

struct GridSize {
  std::uint32_t x = 16;
  std::uint32_t y = 16;
  std::uint32_t z = 3;

  std::uint32_t cells() const { return x * y * z; }
  std::uint32_t index(std::uint32_t cx, std::uint32_t cy, std::uint32_t cz) const { return (cz * y + cy) * x + cx; }
  std::array<std::uint32_t, 3> coords(std::uint32_t i) const { return {i % x, (i / x) % y, i / (x * y)}; }

  static GridSize small() { return {16, 16, 3}; }
  static GridSize medium() { return {32, 32, 3}; }
  static GridSize large() { return {128, 128, 3}; }
};

struct LabyrinthJob {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
};

struct LabyrinthInstance {
  GridSize grid;
  std::vector<LabyrinthJob> jobs;
};

// `jobs` jobs with distinct endpoints drawn uniformly over the grid.
LabyrinthInstance generate_labyrinth(GridSize grid, std::uint32_t jobs, std::uint64_t seed);
// Header line "X Y Z", then one "src x y z dst x y z" line per job.
// Throws kParseError.
LabyrinthInstance parse_labyrinth(std::string_view text);
std::string format_labyrinth(const LabyrinthInstance& inst);

// Breadth-first (Lee) expansion over cells where passable(cell) holds.
// Neighbour order +x, -x, +y, -y, +z, -z. Returns src..dst inclusive.
template <class Passable>
std::optional<std::vector<std::uint32_t>> bfs_route(const GridSize& g, std::uint32_t src, std::uint32_t dst,
                                                    Passable&& passable);

bool adjacent(const GridSize& g, std::uint32_t a, std::uint32_t b);

inline constexpr std::uint32_t kEndpointTag = 0x80000000u;

// Routes every job of an instance. Free cells hold 0, a job's endpoints
// hold kEndpointTag|j until routed, a routed path holds j+1 on every cell.
class Labyrinth final : public Workload {
 public:
  explicit Labyrinth(LabyrinthInstance inst);

  std::string name() const override;
  StmConfig size(StmConfig cfg) const override;
  void setup(Stm& stm) override;
  void tasklet_main(Transaction& tx, int round) override;
  std::vector<std::string> verify(Stm& stm) override;

  const LabyrinthInstance& instance() const { return inst_; }
  // Per job: the committed path, or nullopt if it could not be routed.
  const std::vector<std::optional<std::vector<std::uint32_t>>>& paths() const { return paths_; }
  std::uint32_t processed() const;
  std::uint32_t routed() const;

 private:
  // Claims the next job index, or nullopt when the queue is empty.
  std::optional<std::uint32_t> pop(Transaction& tx);
  void route(Transaction& tx, std::uint32_t job, std::vector<std::uint32_t>& copy);

  LabyrinthInstance inst_;
  std::uint32_t grid_addr_ = 0;
  std::uint32_t queue_addr_ = 0;
  std::vector<std::optional<std::vector<std::uint32_t>>> paths_;
  std::vector<std::uint8_t> done_;
};

template <class Passable>
std::optional<std::vector<std::uint32_t>> bfs_route(const GridSize& g, std::uint32_t src, std::uint32_t dst,
                                                    Passable&& passable) {
  const std::uint32_t n = g.cells();
  constexpr std::uint32_t kUnseen = UINT32_MAX;
  std::vector<std::uint32_t> parent(n, kUnseen);
  std::vector<std::uint32_t> queue;
  queue.reserve(n);
  parent[src] = src;
  queue.push_back(src);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t c = queue[head];
    if (c == dst) break;
    const auto [x, y, z] = g.coords(c);
    std::uint32_t next[6];
    int count = 0;
    if (x + 1 < g.x) next[count++] = c + 1;
    if (x > 0) next[count++] = c - 1;
    if (y + 1 < g.y) next[count++] = c + g.x;
    if (y > 0) next[count++] = c - g.x;
    if (z + 1 < g.z) next[count++] = c + g.x * g.y;
    if (z > 0) next[count++] = c - g.x * g.y;
    for (int i = 0; i < count; ++i) {
      const std::uint32_t m = next[i];
      if (parent[m] != kUnseen || !passable(m)) continue;
      parent[m] = c;
      queue.push_back(m);
    }
  }
  if (parent[dst] == kUnseen) return std::nullopt;
  std::vector<std::uint32_t> path;
  for (std::uint32_t c = dst; c != src; c = parent[c]) path.push_back(c);
  path.push_back(src);
  return std::vector<std::uint32_t>(path.rbegin(), path.rend());
}

}  // namespace pimstm::bench
