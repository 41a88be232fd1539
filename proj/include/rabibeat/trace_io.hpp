#pragma once

// CSV and JSON serialization of traces, spectra and ESR lineshapes.
//
// Trace CSV:     "# rabibeat-trace v1", "time_us,signal", rows.
// Spectrum CSV:  "# rabibeat-spectrum v1", "freq_MHz,magnitude", rows.
// ESR CSV:       "# rabibeat-esr v1", "freq_MHz,signal", rows.
// Numbers are written in shortest round-trip form, so parse -> write is
// byte-stable.  Metadata goes to a JSON sidecar with sections
// units / drive / decay / provenance.

#include "rabibeat/esr.hpp"
#include "rabibeat/signal.hpp"
#include "rabibeat/trace.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace rabibeat {

inline constexpr const char* kTraceHeader = "# rabibeat-trace v1";
inline constexpr const char* kSpectrumHeader = "# rabibeat-spectrum v1";
inline constexpr const char* kEsrHeader = "# rabibeat-esr v1";

std::string format_number(double v);
// Strict full-string parse; throws std::invalid_argument.
double parse_number(const std::string& s);

void write_trace_csv(const SampledTrace& trace, std::ostream& os);
SampledTrace read_trace_csv(std::istream& is, const std::string& source = "<stream>");

nlohmann::ordered_json meta_to_json(const TraceMeta& meta);
TraceMeta meta_from_json(const nlohmann::json& j);

void write_spectrum_csv(const Spectrum& s, std::ostream& os);
void write_esr_csv(const EsrLineshape& s, std::ostream& os);

// Reads a trace CSV and, when `<stem>.json` sits next to it, its metadata.
SampledTrace load_trace(const std::filesystem::path& csv);
// Writes `<stem>.csv` and `<stem>.json` into dir.
void save_trace(const SampledTrace& trace, const std::filesystem::path& dir, const std::string& stem);

// Writes text to a file, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rabibeat
