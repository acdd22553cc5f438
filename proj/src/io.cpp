#include "freespec/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>

namespace freespec {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_complex(cplx z) {
  const double im = z.imag() == 0.0 ? 0.0 : z.imag();
  std::string out = format_real(z.real());
  out += (std::signbit(im) ? "-" : "+");
  out += format_real(std::abs(im));
  out += "i";
  return out;
}

cplx parse_complex(const std::string& text) {
  static const std::regex full(
      R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?(?:([+-])((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?i)?$)");
  static const std::regex pure_imag(R"(^([+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)i$)");
  std::smatch m;
  if (text.empty()) throw Error("invalid complex literal ''");
  if (std::regex_match(text, m, pure_imag)) {
    const std::string mag = m[1].str();
    double im = 1.0;
    if (mag == "-")
      im = -1.0;
    else if (!mag.empty() && mag != "+")
      im = std::stod(mag);
    return {0.0, im};
  }
  if (std::regex_match(text, m, full) && m[1].matched) {
    const double re = std::stod(m[1].str());
    double im = 0.0;
    if (m[2].matched) {
      im = m[3].matched ? std::stod(m[3].str()) : 1.0;
      if (m[2].str() == "-") im = -im;
    }
    return {re, im};
  }
  throw Error("invalid complex literal '" + text + "' (expected a+bi)");
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::json complex_json(cplx z) { return nlohmann::json{{"re", round12(z.real())}, {"im", round12(z.imag())}}; }

nlohmann::json Provenance::to_json() const {
  nlohmann::json j{{"command", command}, {"config", config}, {"version", kVersion}};
  if (seed) j["seed"] = *seed;
  return j;
}

CsvTable::CsvTable(Provenance provenance, std::vector<std::string> columns)
    : provenance_(std::move(provenance)), columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw Error("CsvTable: row has the wrong number of cells");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

std::string CsvTable::str() const {
  std::string out;
  out += "# freespec " + std::string(kVersion) + "\n";
  out += "# command: " + provenance_.command + "\n";
  if (provenance_.seed) out += "# seed: " + std::to_string(*provenance_.seed) + "\n";
  out += "# config: " + provenance_.config.dump() + "\n";
  for (const auto& [key, value] : notes_) out += "# " + key + ": " + value + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

std::string json_report(const Provenance& provenance, const nlohmann::json& payload) {
  nlohmann::json doc = payload;
  doc["meta"] = provenance.to_json();
  return doc.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace freespec
