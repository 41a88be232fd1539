#pragma once

// End-to-end experiments driven by a RunConfig: simulate, analyze, ESR
// synthesis and the imaging demo.  All outputs are deterministic functions of
// the configuration and seed (no timestamps, fixed number formatting).

#include "rabibeat/config.hpp"
#include "rabibeat/trace.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rabibeat {

enum class Command { simulate, analyze, esr, imaging_demo };

const char* to_string(Command c);
Command command_from_string(const std::string& s);

// simulate: rabi-single | rabi-vtype | drift; the others map one to one.
bool command_accepts(Command c, ExperimentKind k);

struct RunResult {
  std::vector<std::filesystem::path> files;  // in write order
  nlohmann::ordered_json summary;
};

// seed overrides run.seed; stochastic kinds fail without either.
RunResult run(const RunConfig& cfg, Command cmd, const std::filesystem::path& out_dir,
              std::optional<std::uint64_t> seed = std::nullopt);

// In-memory trace for the simulate kinds, with metadata filled in.
SampledTrace simulate_trace(const RunConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

// Beat analysis report.  The resolution estimate uses N = base * T1, with T1
// from the trace metadata, else the measured envelope decay, else the trace
// duration; the JSON names the source.
nlohmann::ordered_json analysis_report(const SampledTrace& trace, BeatMode mode, const SpectrumOptions& spectrum,
                                       const std::string& source);

// splitmix64 of root ^ golden-ratio multiple of index: per-run sweep seeds.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace rabibeat
