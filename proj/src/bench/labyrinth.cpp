#include "pimstm/bench/labyrinth.hpp"

#include <random>
#include <set>
#include <sstream>

namespace pimstm::bench {

LabyrinthInstance generate_labyrinth(GridSize grid, std::uint32_t jobs, std::uint64_t seed) {
  if (2ull * jobs > grid.cells()) throw Error(ErrorCode::kConfigInvalid, "labyrinth: grid too small for the jobs");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> cd(0, grid.cells() - 1);
  std::set<std::uint32_t> used;
  auto fresh = [&] {
    for (;;) {
      const std::uint32_t c = cd(rng);
      if (used.insert(c).second) return c;
    }
  };
  LabyrinthInstance inst{grid, {}};
  for (std::uint32_t j = 0; j < jobs; ++j) {
    const std::uint32_t s = fresh();
    inst.jobs.push_back({s, fresh()});
  }
  return inst;
}

LabyrinthInstance parse_labyrinth(std::string_view text) {
  std::istringstream in{std::string(text)};
  LabyrinthInstance inst;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& m) {
    throw Error(ErrorCode::kParseError, "labyrinth line " + std::to_string(lineno) + ": " + m);
  };
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') {
      continue;
    }
    std::istringstream ls(line);
    if (!header) {
      if (!(ls >> inst.grid.x >> inst.grid.y >> inst.grid.z) || inst.grid.cells() == 0) fail("bad header");
      header = true;
      continue;
    }
    std::string s, d;
    std::uint32_t c[6];
    if (!(ls >> s >> c[0] >> c[1] >> c[2] >> d >> c[3] >> c[4] >> c[5]) || s != "src" || d != "dst") {
      fail("expected 'src x y z dst x y z'");
    }
    for (int i = 0; i < 6; ++i) {
      const std::uint32_t lim = i % 3 == 0 ? inst.grid.x : i % 3 == 1 ? inst.grid.y : inst.grid.z;
      if (c[i] >= lim) fail("coordinate outside the grid");
    }
    inst.jobs.push_back({inst.grid.index(c[0], c[1], c[2]), inst.grid.index(c[3], c[4], c[5])});
  }
  if (!header) throw Error(ErrorCode::kParseError, "labyrinth: missing header");
  return inst;
}

std::string format_labyrinth(const LabyrinthInstance& inst) {
  std::ostringstream out;
  out << inst.grid.x << ' ' << inst.grid.y << ' ' << inst.grid.z << '\n';
  for (const auto& j : inst.jobs) {
    const auto s = inst.grid.coords(j.src);
    const auto d = inst.grid.coords(j.dst);
    out << "src " << s[0] << ' ' << s[1] << ' ' << s[2] << " dst " << d[0] << ' ' << d[1] << ' ' << d[2] << '\n';
  }
  return out.str();
}

bool adjacent(const GridSize& g, std::uint32_t a, std::uint32_t b) {
  const auto p = g.coords(a);
  const auto q = g.coords(b);
  std::uint32_t diff = 0;
  for (int i = 0; i < 3; ++i) diff += p[i] > q[i] ? p[i] - q[i] : q[i] - p[i];
  return diff == 1;
}

Labyrinth::Labyrinth(LabyrinthInstance inst) : inst_(std::move(inst)) {
  std::set<std::uint32_t> endpoints;
  for (const auto& j : inst_.jobs) {
    if (j.src >= inst_.grid.cells() || j.dst >= inst_.grid.cells()) {
      throw Error(ErrorCode::kConfigInvalid, "labyrinth: job endpoint outside the grid");
    }
    if (!endpoints.insert(j.src).second || !endpoints.insert(j.dst).second) {
      throw Error(ErrorCode::kConfigInvalid, "labyrinth: job endpoints must be distinct");
    }
  }
}

std::string Labyrinth::name() const { return "labyrinth"; }

StmConfig Labyrinth::size(StmConfig cfg) const {
  // A path visits each cell at most once.
  const std::uint32_t longest = std::min<std::uint32_t>(inst_.grid.cells(), 8192);
  cfg.readset_capacity = longest + 8;
  cfg.writeset_capacity = longest + 8;
  const std::uint32_t words = inst_.grid.cells() + 2 * static_cast<std::uint32_t>(inst_.jobs.size()) + 2;
  cfg.heap_bytes = (words * 4 + 4095) & ~4095u;
  return cfg;
}

void Labyrinth::setup(Stm& stm) {
  grid_addr_ = stm.heap_alloc(inst_.grid.cells() * 4);
  queue_addr_ = stm.heap_alloc(4 + 8 * static_cast<std::uint32_t>(inst_.jobs.size()));
  stm.host_store(queue_addr_, 0);
  for (std::uint32_t j = 0; j < inst_.jobs.size(); ++j) {
    stm.host_store(queue_addr_ + 4 + 8 * j, inst_.jobs[j].src);
    stm.host_store(queue_addr_ + 8 + 8 * j, inst_.jobs[j].dst);
    stm.host_store(grid_addr_ + 4 * inst_.jobs[j].src, kEndpointTag | j);
    stm.host_store(grid_addr_ + 4 * inst_.jobs[j].dst, kEndpointTag | j);
  }
  paths_.assign(inst_.jobs.size(), std::nullopt);
  done_.assign(inst_.jobs.size(), 0);
}

std::optional<std::uint32_t> Labyrinth::pop(Transaction& tx) {
  const auto total = static_cast<std::uint32_t>(inst_.jobs.size());
  return tx.run([&](Transaction& x) -> std::optional<std::uint32_t> {
    const std::uint32_t head = x.load(queue_addr_);
    if (head >= total) return std::nullopt;
    x.store(queue_addr_, head + 1);
    return head;
  });
}

void Labyrinth::route(Transaction& tx, std::uint32_t job, std::vector<std::uint32_t>& copy) {
  const std::uint32_t src = tx.raw_load(queue_addr_ + 4 + 8 * job);
  const std::uint32_t dst = tx.raw_load(queue_addr_ + 8 + 8 * job);
  const std::uint32_t own = kEndpointTag | job;
  paths_[job] = tx.run([&](Transaction& x) -> std::optional<std::vector<std::uint32_t>> {
    for (std::uint32_t c = 0; c < copy.size(); ++c) copy[c] = x.raw_load(grid_addr_ + 4 * c);
    auto path = bfs_route(inst_.grid, src, dst, [&](std::uint32_t c) { return copy[c] == 0 || copy[c] == own; });
    if (!path) return std::nullopt;
    for (std::uint32_t c : *path) {
      const std::uint32_t v = x.load(grid_addr_ + 4 * c);
      if (v != 0 && v != own) x.abort();
      x.store(grid_addr_ + 4 * c, job + 1);
    }
    return path;
  });
  done_[job] = 1;
}

void Labyrinth::tasklet_main(Transaction& tx, int) {
  std::vector<std::uint32_t> copy(inst_.grid.cells());
  while (auto job = pop(tx)) route(tx, *job, copy);
}

std::uint32_t Labyrinth::processed() const {
  std::uint32_t n = 0;
  for (auto d : done_) n += d;
  return n;
}

std::uint32_t Labyrinth::routed() const {
  std::uint32_t n = 0;
  for (const auto& p : paths_) n += p.has_value();
  return n;
}

std::vector<std::string> Labyrinth::verify(Stm& stm) {
  std::vector<std::string> problems;
  const GridSize& g = inst_.grid;
  if (processed() != inst_.jobs.size()) {
    problems.push_back("processed " + std::to_string(processed()) + " of " + std::to_string(inst_.jobs.size()) +
                       " jobs");
  }
  std::vector<std::uint32_t> owner(g.cells(), 0);
  std::vector<std::uint32_t> cells_per_job(inst_.jobs.size() + 1, 0);
  for (std::uint32_t j = 0; j < paths_.size(); ++j) {
    if (!paths_[j]) continue;
    const auto& p = *paths_[j];
    const std::string tag = "job " + std::to_string(j) + ": ";
    if (p.front() != inst_.jobs[j].src || p.back() != inst_.jobs[j].dst) problems.push_back(tag + "endpoints differ");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i > 0 && !adjacent(g, p[i - 1], p[i])) problems.push_back(tag + "path not connected");
      if (owner[p[i]] != 0) problems.push_back(tag + "shares cell " + std::to_string(p[i]) + " with another path");
      owner[p[i]] = j + 1;
    }
  }
  for (std::uint32_t c = 0; c < g.cells(); ++c) {
    const std::uint32_t v = stm.host_load(grid_addr_ + 4 * c);
    if (owner[c] != 0 && v != owner[c]) problems.push_back("cell " + std::to_string(c) + " lost its path mark");
    if (owner[c] == 0 && v != 0 && (v & kEndpointTag) == 0) {
      problems.push_back("cell " + std::to_string(c) + " marked by no committed path");
    }
  }
  return problems;
}

}  // namespace pimstm::bench
