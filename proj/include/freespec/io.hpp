#pragma once

#include "freespec/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace freespec {

inline constexpr const char* kVersion = "0.1.0";

/// 12 significant digits, '.' decimal point.
std::string format_real(double x);
/// "a+bi" / "a-bi" with 12 significant digits per part.
std::string format_complex(cplx z);
/// Parse "a+bi", "a-bi", "bi", "a", "i", "-2i" (whitespace not allowed).
cplx parse_complex(const std::string& text);

/// Round to 12 significant digits so JSON output matches the CSV precision.
double round12(double x);
nlohmann::json complex_json(cplx z);

/// Provenance carried by every report: command, effective configuration,
/// master seed (for randomized commands) and library version.
struct Provenance {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::optional<std::uint64_t> seed;

  nlohmann::json to_json() const;
};

/// CSV table with '#'-prefixed provenance header lines.
class CsvTable {
 public:
  CsvTable(Provenance provenance, std::vector<std::string> columns);
  void add_row(std::vector<std::string> cells);
  /// Extra "# key: value" header line (summary statistics and the like).
  void add_note(const std::string& key, const std::string& value);
  std::string str() const;

 private:
  Provenance provenance_;
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::vector<std::vector<std::string>> rows_;
};

/// JSON document {"meta": provenance, ...payload}. Keys are emitted in sorted
/// order, so the text is a deterministic function of the content.
std::string json_report(const Provenance& provenance, const nlohmann::json& payload);

/// Write text to a file, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

}  // namespace freespec
