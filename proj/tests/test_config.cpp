#include "rabibeat/config.hpp"
#include "rabibeat/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rabibeat;

namespace {

std::size_t parse_error_line(const std::string& text) {
  try {
    ConfigDocument::parse(text, "t.ini");
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string resolve_error_field(const std::string& text) {
  try {
    resolve(ConfigDocument::parse(text));
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

const char* kSingle = "[experiment]\nkind = rabi-single\n[drive]\nomega0_MHz = 22.2\n";

}  // namespace

TEST_CASE("INI syntax errors carry line numbers") {
  CHECK(parse_error_line("[experiment\nkind = esr\n") == 1);
  CHECK(parse_error_line("[]\n") == 1);
  CHECK(parse_error_line("kind = esr\n") == 1);
  CHECK(parse_error_line("# c\n[experiment]\nkind esr\n") == 3);
  CHECK(parse_error_line("[experiment]\nkind = esr\nkind = drift\n") == 3);
  CHECK(parse_error_line("[experiment]\n; ok\n\nflavour = x\n") == 4);
  CHECK(parse_error_line(kSingle) == 0);
}

TEST_CASE("set and get") {
  ConfigDocument d = ConfigDocument::parse(kSingle);
  CHECK(d.get("drive.omega0_MHz") == "22.2");
  CHECK_FALSE(d.get("drive.lambda_MHz").has_value());
  d.set("drive.omega0_MHz", "10");
  CHECK(d.get("drive.omega0_MHz") == "10");
  CHECK_THROWS_AS(d.set("drive.omega", "1"), ValidationError);
}

TEST_CASE("resolve defaults") {
  const RunConfig c = resolve(ConfigDocument::parse(kSingle));
  CHECK(c.kind == ExperimentKind::rabi_single);
  CHECK(c.omega0_MHz == 22.2);
  REQUIRE(c.manifolds.detunings.size() == 3);
  CHECK(c.manifolds.detunings[1] == 2.18);
  CHECK(c.manifolds.detunings[2] == doctest::Approx(4.36).epsilon(1e-15));
  for (double w : c.manifolds.weights) CHECK(w == doctest::Approx(c.manifolds.weights[0]).epsilon(1e-15));
  CHECK(c.decay.kind == DecayModel::Kind::none);
  CHECK_FALSE(c.seed.has_value());
}

TEST_CASE("validation errors name the key") {
  CHECK(resolve_error_field("[drive]\nomega0_MHz = 1\n") == "experiment.kind");
  CHECK(resolve_error_field("[experiment]\nkind = rabbit\n") == "experiment.kind");
  CHECK(resolve_error_field(std::string(kSingle) + "[grid]\nt_start_us = 5\nt_end_us = 5\n") == "grid.t_end_us");
  CHECK(resolve_error_field(std::string(kSingle) + "[grid]\ndt_us = 0\n") == "grid.dt_us");
  CHECK(resolve_error_field(std::string(kSingle) + "[grid]\nn_points = 1\n") == "grid.n_points");
  CHECK(resolve_error_field("[experiment]\nkind = rabi-single\n[drive]\nomega0_MHz = -3\n") == "drive.omega0_MHz");
  CHECK(resolve_error_field("[experiment]\nkind = rabi-single\n[drive]\nomega0_MHz = abc\n") == "drive.omega0_MHz");
  CHECK(resolve_error_field(std::string(kSingle) + "[run]\nseed = -1\n") == "run.seed");
  CHECK(resolve_error_field(std::string(kSingle) + "[drive]\n") == "");
  CHECK(resolve_error_field(std::string(kSingle) + "[analysis]\nwindow = blackman\n") == "analysis.window");
  CHECK(resolve_error_field(std::string(kSingle) + "[drift]\ntrajectory = 0:1, 5\n") == "drift.trajectory");
  CHECK(resolve_error_field(std::string(kSingle) + "[manifolds]\ndetunings_MHz = 0, x\n") ==
        "manifolds.detunings_MHz");
  CHECK(resolve_error_field(std::string(kSingle) + "[decay]\nkind = exponential\n") == "decay.t1_rho_us");
}

TEST_CASE("V-type drive parameters") {
  const std::string head = "[experiment]\nkind = rabi-vtype\n[drive]\n";
  CHECK(resolve_error_field(head + "lambda_MHz = 10\nbase_MHz = 42\n") == "drive.base_MHz");
  CHECK(resolve_error_field(head + "omega0_MHz = 1\n") == "drive.lambda_MHz");
  CHECK(resolve_error_field(head + "lambda_MHz = 10\nDelta_MHz = 3\n") == "drive.Delta_MHz");
  const RunConfig c = resolve(ConfigDocument::parse(head + "base_MHz = 42\n"));
  CHECK(c.lambda_MHz == doctest::Approx(42.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
}

TEST_CASE("small-detuning warnings") {
  const RunConfig quiet = resolve(ConfigDocument::parse(kSingle));
  CHECK(quiet.warnings.empty());
  const RunConfig loud =
      resolve(ConfigDocument::parse("[experiment]\nkind = rabi-single\n[drive]\nomega0_MHz = 3\n"));
  CHECK_FALSE(loud.warnings.empty());
}

TEST_CASE("analyze and ESR specific checks") {
  CHECK(resolve_error_field("[experiment]\nkind = analyze\n") == "analysis.input_trace");
  CHECK(resolve_error_field("[experiment]\nkind = esr\n[esr]\ntransitions_MHz = 0, 1\ncontrasts = 0.1, 0.2, 0.3\n") ==
        "esr.contrasts");
  CHECK(resolve_error_field("[experiment]\nkind = esr\n[esr]\ntransitions_MHz = 0\ncontrasts = 1.5\n") ==
        "esr.contrasts");
  const RunConfig c =
      resolve(ConfigDocument::parse("[experiment]\nkind = esr\n[esr]\ntransitions_MHz = 0, 1, 2\ncontrasts = 0.1\n"));
  CHECK(c.esr_contrasts == std::vector<double>{0.1, 0.1, 0.1});
}

TEST_CASE("relative input trace resolves against the config directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rabibeat_test_cfg";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "a.ini") << "[experiment]\nkind = analyze\n[analysis]\ninput_trace = data/t.csv\n";
  const RunConfig c = resolve(ConfigDocument::load((dir / "a.ini").string()));
  CHECK(fs::path(c.input_trace) == dir / "data" / "t.csv");
  CHECK_THROWS_AS(ConfigDocument::load((dir / "missing.ini").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("every bundled preset resolves") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto text = preset_text(name);
    REQUIRE(text.has_value());
    const RunConfig c = resolve(ConfigDocument::load(name));
    CHECK(c.name == name);
  }
  for (const char* required : {"paper-fig2", "paper-fig3", "paper-fig4", "paper-fig5", "paper-fig7", "paper-fig8"})
    CHECK(preset_text(required).has_value());
  CHECK_FALSE(preset_text("nope").has_value());
  const RunConfig v = resolve(ConfigDocument::load("paper-fig7"));
  CHECK(v.kind == ExperimentKind::rabi_vtype);
  CHECK(2.0 * std::sqrt(2.0) * v.lambda_MHz == doctest::Approx(42.0).epsilon(1e-15));
}

TEST_CASE("schema lists every key") {
  const std::string s = schema_text();
  CHECK(s.rfind("# rabibeat config schema v1", 0) == 0);
  for (const auto& e : config_schema()) CHECK(s.find(e.key) != std::string::npos);
}
