#include "rabibeat/errors.hpp"
#include "rabibeat/runner.hpp"
#include "rabibeat/trace_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace rabibeat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rabibeat_runner_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_drift() {
  ConfigDocument d = ConfigDocument::load("paper-fig6");
  d.set("drift.sweeps", "50");
  d.set("grid.t_end_us", "5");
  return resolve(d);
}

}  // namespace

TEST_CASE("command names") {
  CHECK(command_from_string("imaging-demo") == Command::imaging_demo);
  CHECK(std::string(to_string(Command::analyze)) == "analyze");
  CHECK_THROWS_AS(command_from_string("plot"), ValidationError);
  CHECK(command_accepts(Command::simulate, ExperimentKind::drift));
  CHECK_FALSE(command_accepts(Command::simulate, ExperimentKind::esr));
}

TEST_CASE("command and experiment kind must agree") {
  const RunConfig c = resolve(ConfigDocument::load("paper-fig2"));
  try {
    run(c, Command::simulate, scratch("mismatch"));
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "experiment.kind");
  }
}

TEST_CASE("drift runs require a seed") {
  ConfigDocument d = ConfigDocument::load("paper-fig6");
  d.set("drift.sweeps", "5");
  RunConfig c = resolve(d);
  c.seed.reset();
  try {
    simulate_trace(c);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "run.seed");
  }
  CHECK_NOTHROW(simulate_trace(c, 5));
}

TEST_CASE("simulate writes trace, sidecar and plot stub deterministically") {
  const RunConfig c = small_drift();
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const RunResult ra = run(c, Command::simulate, a, 77);
  const RunResult rb = run(c, Command::simulate, b, 77);
  REQUIRE(ra.files.size() == rb.files.size());
  std::set<std::string> names;
  for (std::size_t i = 0; i < ra.files.size(); ++i) {
    names.insert(ra.files[i].filename().string());
    CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
  }
  CHECK(names.count("trace.csv"));
  CHECK(names.count("trace.json"));
  CHECK(names.count("drift.json"));
  CHECK(names.count("plot_trace.gp"));
  CHECK(ra.summary["seed"] == 77);

  const fs::path other = scratch("det_c");
  run(c, Command::simulate, other, 78);
  CHECK(slurp(other / "trace.csv") != slurp(a / "trace.csv"));
  for (const auto& p : {a, b, other}) fs::remove_all(p);
}

TEST_CASE("analysis report content") {
  const RunConfig c = resolve(ConfigDocument::load("paper-fig3"));
  const SampledTrace t = simulate_trace(c);
  const auto j = analysis_report(t, BeatMode::single, SpectrumOptions{}, "memory");
  CHECK(j["format"] == "rabibeat-report v1");
  CHECK(j["input"]["samples"] == t.size());
  CHECK(j["resolution"]["t1_source"] == "metadata t1_rho");
  CHECK(j["resolution"]["t1_us"] == 25.0);
  CHECK(j["resolution"]["n_oscillations"].get<double>() == doctest::Approx(555.0).epsilon(0.01));
  CHECK(j["recovered_detunings_MHz"].size() == 2);
  CHECK(j["base_frequency_MHz"].get<double>() == doctest::Approx(22.2).epsilon(0.01));
}

TEST_CASE("single tone analyzes to no beats") {
  ConfigDocument d = ConfigDocument::load("paper-fig3");
  d.set("manifolds.detunings_MHz", "0");
  d.set("manifolds.weights", "1");
  const SampledTrace t = simulate_trace(resolve(d));
  const auto j = analysis_report(t, BeatMode::single, SpectrumOptions{}, "memory");
  CHECK(j["beat_frequencies_MHz"].empty());
  CHECK(j["recovered_detunings_MHz"].empty());
}

TEST_CASE("analyze, ESR and imaging commands write their files") {
  const fs::path dir = scratch("cmds");
  const RunResult an = run(resolve(ConfigDocument::load("paper-fig4")), Command::analyze, dir / "an");
  CHECK(fs::exists(dir / "an" / "report.json"));
  CHECK(fs::exists(dir / "an" / "spectrum.csv"));
  CHECK(an.summary["recovered_detunings_MHz"].size() == 2);

  const RunResult esr = run(resolve(ConfigDocument::load("paper-fig5")), Command::esr, dir / "esr");
  CHECK(esr.summary["dips"].size() == 5);
  std::istringstream csv(slurp(dir / "esr" / "esr.csv"));
  std::string first;
  std::getline(csv, first);
  CHECK(first == kEsrHeader);

  const RunResult im = run(resolve(ConfigDocument::load("imaging-demo")), Command::imaging_demo, dir / "im");
  CHECK(im.summary["x"]["within_budget"] == true);
  CHECK(fs::exists(dir / "im" / "fieldmap.csv"));

  ConfigDocument off = ConfigDocument::load("imaging-demo");
  off.set("imaging.emitter_x_um", "7");
  CHECK_THROWS_AS(run(resolve(off), Command::imaging_demo, dir / "off"), RangeError);
  fs::remove_all(dir);
}

TEST_CASE("analyze reads a saved trace") {
  const fs::path dir = scratch("roundtrip");
  run(resolve(ConfigDocument::load("paper-fig3")), Command::simulate, dir / "sim");
  ConfigDocument d = ConfigDocument::parse("[experiment]\nkind = analyze\n");
  d.set("analysis.input_trace", (dir / "sim" / "trace.csv").string());
  const RunResult file_run = run(resolve(d), Command::analyze, dir / "a1");
  const RunResult preset_run = run(resolve(ConfigDocument::load("paper-fig4")), Command::analyze, dir / "a2");
  CHECK(file_run.summary["recovered_detunings_MHz"] == preset_run.summary["recovered_detunings_MHz"]);
  fs::remove_all(dir);
}

TEST_CASE("derived seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
  CHECK(derive_seed(42, 3) != derive_seed(43, 3));
}
