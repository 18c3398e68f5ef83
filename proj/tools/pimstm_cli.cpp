// Batch experiment runner: benchmark x workload x variant x placement x tasklets.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pimstm/error.hpp"
#include "pimstm/report/report.hpp"

namespace {

using pimstm::Error;
using pimstm::ErrorCode;

constexpr int kExitConfig = 1;
constexpr int kExitOracle = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "1-11", "1,4,11" or a mix.
std::vector<int> parse_tasklets(const std::string& s) {
  std::vector<int> out;
  for (const auto& part : split(s, ',')) {
    try {
      if (const auto dash = part.find('-'); dash != std::string::npos) {
        const int a = std::stoi(part.substr(0, dash));
        const int b = std::stoi(part.substr(dash + 1));
        for (int t = a; t <= b; ++t) out.push_back(t);
      } else {
        out.push_back(std::stoi(part));
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kConfigInvalid, "bad tasklet list '" + s + "'");
    }
  }
  return out;
}

std::vector<pimstm::Variant> parse_variants(const std::string& s) {
  if (s == "all") return {pimstm::kAllVariants.begin(), pimstm::kAllVariants.end()};
  std::vector<pimstm::Variant> out;
  for (const auto& name : split(s, ',')) {
    auto v = pimstm::parse_variant(name);
    if (!v) throw Error(ErrorCode::kConfigInvalid, "unknown STM variant '" + name + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run STM benchmarks on the simulated DPU and report statistics"};
  std::string bench = "arraybench", workload = "A", stm = "all", placement = "mram", tasklets = "1-11";
  std::string format = "csv", out_path, mutation = "none", labyrinth_file;
  pimstm::report::RunSpec spec;
  app.add_option("--bench", bench, "arraybench | linkedlist | kmeans | labyrinth")->capture_default_str();
  app.add_option("--workload", workload, "A/B, LC/HC or S/M/L")->capture_default_str();
  app.add_option("--stm", stm, "variant name, comma list, or all")->capture_default_str();
  app.add_option("--placement", placement, "metadata tier: wram | mram")->capture_default_str();
  app.add_option("--tasklets", tasklets, "e.g. 1-11 or 1,4,11")->capture_default_str();
  app.add_option("--dpus", spec.dpus, "simulated DPUs (kmeans, labyrinth)")->capture_default_str();
  app.add_option("--runs", spec.runs, "repetitions per cell")->capture_default_str();
  app.add_option("--seed", spec.seed)->capture_default_str();
  app.add_option("--format", format, "csv | json")->capture_default_str();
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_flag("--oracle", spec.oracle, "check benchmark invariants and snapshots");
  app.add_option("--retry-cap", spec.retry_cap, "aborts before a transaction gives up")->capture_default_str();
  app.add_option("--time-budget", spec.time_budget, "seconds per run before a retrying transaction gives up (0 = off)")
      ->capture_default_str();
  app.add_option("--mutation", mutation, "deliberately broken variant for oracle testing")->capture_default_str();
  app.add_option("--interleave", spec.interleave, "yield once every N simulated accesses (0 = off)")
      ->capture_default_str();
  app.add_option("--txns", spec.txns_per_tasklet, "arraybench transactions per tasklet");
  app.add_option("--points", spec.points, "kmeans points per DPU");
  app.add_option("--labyrinth-file", labyrinth_file, "grid and jobs file");
  CLI11_PARSE(app, argc, argv);

  try {
    spec.bench = pimstm::report::parse_bench(bench);
    spec.workload = workload;
    spec.variants = parse_variants(stm);
    if (placement == "wram") {
      spec.placement = pimstm::Tier::kWram;
    } else if (placement == "mram") {
      spec.placement = pimstm::Tier::kMram;
    } else {
      throw Error(ErrorCode::kConfigInvalid, "placement must be wram or mram");
    }
    spec.tasklets = parse_tasklets(tasklets);
    auto m = pimstm::parse_mutation(mutation);
    if (!m) throw Error(ErrorCode::kConfigInvalid, "unknown mutation '" + mutation + "'");
    spec.mutation = *m;
    spec.labyrinth_file = labyrinth_file;
    const auto fmt = pimstm::report::parse_format(format);

    const auto report = pimstm::report::run(spec);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    const std::string text = pimstm::report::emit(report, fmt);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path);
      if (!out) throw Error(ErrorCode::kConfigInvalid, "cannot write " + out_path);
      out << text;
    }
    if (report.oracle_failed()) {
      for (const auto& c : report.cells) {
        if (!c.oracle || !c.oracle->failed()) continue;
        std::cerr << "oracle violation: " << c.variant << " tasklets=" << c.tasklets
                  << " snapshot_violations=" << c.oracle->snapshot_violations
                  << " serializable=" << c.oracle->serializable << '\n';
        for (const auto& p : c.oracle->problems) std::cerr << "  " << p << '\n';
      }
      return kExitOracle;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << pimstm::to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::kOracleViolation ? kExitOracle : kExitConfig;
  }
  return 0;
}
