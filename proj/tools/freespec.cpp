// Command-line front end: spectra, simulation experiments and the identity suite.

#include "freespec/experiments.hpp"
#include "freespec/identities.hpp"
#include "freespec/io.hpp"
#include "freespec/linearize.hpp"
#include "freespec/ncpoly.hpp"
#include "freespec/spectra.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace freespec;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kViolation = 1, kUsage = 2, kFailure = 3 };

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& msg) : Error(path + ": " + msg) {}
};

enum class Kind { Real, Int, Seed, Text, Complex, IntList, Bool };

struct Field {
  std::string key;
  Kind kind;
  json fallback;
  std::string help;
};

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& c : out)
    if (c == '_') c = '-';
  return "--" + out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Converts a flag string or a config-file value into the canonical JSON form of the field.
json coerce(const Field& f, const json& value, const std::string& path) {
  try {
    switch (f.kind) {
      case Kind::Real:
        if (value.is_number()) return value.get<double>();
        if (value.is_string()) {
          std::size_t used = 0;
          const std::string s = value.get<std::string>();
          const double v = std::stod(s, &used);
          if (used != s.size()) throw std::invalid_argument(s);
          return v;
        }
        break;
      case Kind::Int:
        if (value.is_number_integer()) return value.get<long long>();
        if (value.is_string()) {
          std::size_t used = 0;
          const std::string s = value.get<std::string>();
          const long long v = std::stoll(s, &used);
          if (used != s.size()) throw std::invalid_argument(s);
          return v;
        }
        break;
      case Kind::Seed:
        if (value.is_number_unsigned()) return value.get<std::uint64_t>();
        if (value.is_number_integer() && value.get<long long>() >= 0) return value.get<std::uint64_t>();
        if (value.is_string()) {
          std::size_t used = 0;
          const std::string s = value.get<std::string>();
          if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
          const unsigned long long v = std::stoull(s, &used);
          if (used != s.size()) throw std::invalid_argument(s);
          return static_cast<std::uint64_t>(v);
        }
        break;
      case Kind::Text:
        if (value.is_string()) return value;
        break;
      case Kind::Complex:
        if (value.is_string()) {
          parse_complex(value.get<std::string>());
          return value;
        }
        if (value.is_number()) return format_complex(value.get<double>());
        break;
      case Kind::IntList: {
        json out = json::array();
        if (value.is_array()) {
          for (const auto& v : value) {
            if (!v.is_number_integer()) throw std::invalid_argument("list entry");
            out.push_back(v.get<long long>());
          }
          return out;
        }
        if (value.is_string()) {
          for (const auto& item : split_commas(value.get<std::string>())) {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
          }
          return out;
        }
        break;
      }
      case Kind::Bool:
        if (value.is_boolean()) return value;
        break;
    }
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  } catch (const std::exception&) {
  }
  throw ConfigError(path, "invalid value " + value.dump());
}

class Settings {
 public:
  Settings(json values, std::map<std::string, std::string> origin)
      : values_(std::move(values)), origin_(std::move(origin)) {}

  const json& values() const { return values_; }
  std::string path(const std::string& key) const {
    auto it = origin_.find(key);
    return it == origin_.end() ? key : it->second;
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const { throw ConfigError(path(key), msg); }

  double real(const std::string& key) const { return values_.at(key).get<double>(); }
  long long integer(const std::string& key) const { return values_.at(key).get<long long>(); }
  std::uint64_t seed(const std::string& key) const { return values_.at(key).get<std::uint64_t>(); }
  std::string text(const std::string& key) const { return values_.at(key).get<std::string>(); }
  bool flag(const std::string& key) const { return values_.at(key).get<bool>(); }
  cplx complex(const std::string& key) const { return parse_complex(text(key)); }
  std::vector<int> int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& v : values_.at(key)) out.push_back(static_cast<int>(v.get<long long>()));
    return out;
  }

  double positive(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }
  int at_least(const std::string& key, long long lo) const {
    const long long v = integer(key);
    if (v < lo || v > 1000000000) fail(key, "must be an integer ≥ " + std::to_string(lo));
    return static_cast<int>(v);
  }

 private:
  json values_;
  std::map<std::string, std::string> origin_;
};

using Handler = std::function<int(const Settings&, const Provenance&)>;

// One subcommand: its fields become flags, and may also be supplied by --config.
class Command {
 public:
  Command(CLI::App& root, const std::string& name, const std::string& description, std::vector<Field> fields,
          Handler handler)
      : name_(name), fields_(std::move(fields)), handler_(std::move(handler)) {
    app_ = root.add_subcommand(name, description);
    app_->add_option("--config", config_path_, "JSON file with default values for any of the flags below");
    for (const auto& f : fields_) {
      const std::string flag = flag_name(f.key);
      if (f.kind == Kind::Bool) {
        flags_[f.key] = app_->add_flag(flag, f.help);
      } else {
        flags_[f.key] = app_->add_option(flag, raw_[f.key], f.help)->capture_default_str();
      }
    }
  }

  bool selected() const { return app_->parsed(); }

  int run() const {
    json values = json::object();
    std::map<std::string, std::string> origin;
    for (const auto& f : fields_) {
      values[f.key] = f.fallback;
      origin[f.key] = flag_name(f.key);
    }
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw ConfigError("--config", "cannot read '" + config_path_ + "'");
      json file;
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
      }
      if (!file.is_object()) throw ConfigError("config", "top level must be an object");
      for (const auto& [key, value] : file.items()) {
        if (key == "command") {
          if (value != name_) throw ConfigError("config.command", "names a different subcommand");
          continue;
        }
        const auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field& f) { return f.key == key; });
        if (it == fields_.end()) throw ConfigError("config." + key, "unknown field for '" + name_ + "'");
        values[key] = coerce(*it, value, "config." + key);
        origin[key] = "config." + key;
      }
    }
    for (const auto& f : fields_) {
      const CLI::Option* opt = flags_.at(f.key);
      if (opt->count() == 0) continue;
      values[f.key] = f.kind == Kind::Bool ? json(true) : coerce(f, raw_.at(f.key), flag_name(f.key));
      origin[f.key] = flag_name(f.key);
    }
    Provenance prov;
    prov.command = name_;
    prov.config = values;
    prov.config.erase("out");  // where the report goes does not affect its content
    if (values.contains("seed")) prov.seed = values["seed"].get<std::uint64_t>();
    return handler_(Settings(values, origin), prov);
  }

 private:
  std::string name_;
  std::vector<Field> fields_;
  Handler handler_;
  CLI::App* app_ = nullptr;
  std::string config_path_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, CLI::Option*> flags_;
};

// ---------------------------------------------------------------------------

std::vector<Field> polynomial_fields(const std::string& fallback = "") {
  return {{"poly", Kind::Text, fallback, "polynomial: DSL expression or JSON matrix form {\"n\":..,\"entries\":..}"},
          {"poly_file", Kind::Text, "", "read the polynomial from this file instead"}};
}

std::vector<Field> solver_fields() {
  const ContinuationSchedule d;
  return {{"damping", Kind::Real, d.damping, "fixed-point damping in (0, 1]"},
          {"tol", Kind::Real, d.tol, "per-step residual tolerance"},
          {"final_tol", Kind::Real, d.final_tol, "residual required of returned solutions"},
          {"t_start", Kind::Real, d.t_start, "initial imaginary shift (negative: automatic)"},
          {"factor", Kind::Real, d.factor, "shift reduction factor per continuation step, in (0, 1)"},
          {"max_iter", Kind::Int, d.max_iter, "iteration cap per continuation step"},
          {"min_imag", Kind::Real, SpectralOptions{}.min_imag, "refuse to solve closer than this to the real axis"}};
}

std::vector<Field> output_fields() { return {{"out", Kind::Text, "-", "output file ('-' for stdout)"}}; }

std::vector<Field> concat(std::initializer_list<std::vector<Field>> parts) {
  std::vector<Field> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

MatrixPolynomial load_polynomial(const Settings& s) {
  std::string text = s.text("poly");
  std::string key = "poly";
  const std::string file = s.text("poly_file");
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) s.fail("poly_file", "cannot read '" + file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    key = "poly_file";
  }
  if (text.empty()) s.fail("poly", "a polynomial is required");
  try {
    return parse_matrix_polynomial(text);
  } catch (const Error& e) {
    s.fail(key, e.what());
  }
}

SpectralOptions spectral_options(const Settings& s) {
  SpectralOptions o;
  o.schedule.damping = s.real("damping");
  if (!(o.schedule.damping > 0.0 && o.schedule.damping <= 1.0)) s.fail("damping", "must lie in (0, 1]");
  o.schedule.tol = s.positive("tol");
  o.schedule.final_tol = s.positive("final_tol");
  o.schedule.t_start = s.real("t_start");
  o.schedule.factor = s.real("factor");
  if (!(o.schedule.factor > 0.0 && o.schedule.factor < 1.0)) s.fail("factor", "must lie in (0, 1)");
  o.schedule.max_iter = s.at_least("max_iter", 1);
  o.min_imag = s.positive("min_imag");
  return o;
}

EntryLaw entry_law(const Settings& s) {
  try {
    return EntryLaw::parse(s.text("law"));
  } catch (const Error& e) {
    s.fail("law", e.what());
  }
}

std::vector<int> sizes(const Settings& s, int min_size) {
  const std::vector<int> out = s.int_list("sizes");
  if (out.empty()) s.fail("sizes", "must list at least one matrix size");
  for (int n : out)
    if (n < min_size) s.fail("sizes", "every size must be at least " + std::to_string(min_size));
  return out;
}

json intervals_json(const SupportSet& set) {
  json arr = json::array();
  for (const auto& [a, b] : set.intervals) arr.push_back({round12(a), round12(b)});
  return arr;
}

// ---------------------------------------------------------------------------

int cmd_linearize(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  SaltDesign d;
  try {
    d = linearize(f);
  } catch (const Error& e) {
    s.fail("poly", e.what());
  }
  json doc;
  doc["design"] = json::parse(design_to_json(d));
  doc["polynomial"] = f.to_string();
  if (s.flag("verify")) {
    const VerificationResult v = verify_linearization(f, d, s.at_least("trials", 1), s.seed("seed"));
    doc["verification"] = {{"ok", v.ok},
                           {"max_deviation", round12(v.max_deviation)},
                           {"trials", v.trials},
                           {"reshuffles", v.reshuffles}};
    write_text(s.text("out"), json_report(prov, doc));
    return v.ok ? kOk : kViolation;
  }
  write_text(s.text("out"), json_report(prov, doc));
  return kOk;
}

int cmd_density(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  const double xmin = s.real("xmin"), xmax = s.real("xmax");
  if (!(xmin < xmax)) s.fail("xmax", "must exceed xmin");
  const int points = s.at_least("points", 2);
  const double eps = s.positive("epsilon");
  const SpectralOptions opts = spectral_options(s);
  if (eps < opts.min_imag) s.fail("epsilon", "is below min_imag; the solver refuses such points");
  const DensityCurve curve = density(linearize(f), linspace(xmin, xmax, points), eps, opts);
  CsvTable table(prov, {"x", "density", "failed"});
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    table.add_row({format_real(curve.grid[i]), format_real(curve.values[i]), curve.failed[i] ? "1" : "0"});
  write_text(s.text("out"), table.str());
  return kOk;
}

SupportOptions support_options(const Settings& s) {
  SupportOptions o;
  o.spectral = spectral_options(s);
  o.tol = s.positive("support_tol");
  return o;
}

int cmd_support(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  const SupportSet set = support_of(f, support_options(s));
  json doc;
  doc["intervals"] = intervals_json(set);
  doc["epsilon"] = round12(set.epsilon);
  doc["threshold"] = round12(set.threshold);
  write_text(s.text("out"), json_report(prov, doc));
  return kOk;
}

int cmd_norm(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  const double norm = operator_norm(f, support_options(s));
  const std::string out = s.text("out");
  if (out.empty() || out == "-") {
    std::cout << format_real(norm) << "\n";
  } else {
    json doc;
    doc["norm"] = round12(norm);
    write_text(out, json_report(prov, doc));
  }
  return kOk;
}

int cmd_simulate(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  if (!f.is_self_adjoint()) s.fail("poly", "must be self-adjoint");
  ConvergenceConfig cfg;
  cfg.sizes = sizes(s, 1);
  cfg.samples = s.at_least("samples", 1);
  cfg.seed = s.seed("seed");
  cfg.epsilon = s.positive("epsilon");
  cfg.law = entry_law(s);
  cfg.threads = s.at_least("threads", 0);
  const SupportSet set = support_of(f, support_options(s));
  const ConvergenceReport r = convergence_experiment(f, set, cfg);
  CsvTable table(prov, {"N", "sample", "lambda_max", "lambda_min", "outliers_eps", "edge_gap"});
  table.add_note("support", intervals_json(set).dump());
  table.add_note("norm", format_real(r.norm));
  for (const auto& row : r.rows)
    table.add_row({std::to_string(row.N), std::to_string(row.sample), format_real(row.lambda_max),
                   format_real(row.lambda_min), std::to_string(row.outliers_eps), format_real(row.edge_gap)});
  write_text(s.text("out"), table.str());
  return kOk;
}

int cmd_bias(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  if (!f.is_self_adjoint()) s.fail("poly", "must be self-adjoint");
  BiasConfig cfg;
  cfg.sizes = sizes(s, 1);
  cfg.samples = s.at_least("samples", 2);
  cfg.seed = s.seed("seed");
  cfg.z = s.complex("z");
  if (!(cfg.z.imag() > 0.0)) s.fail("z", "imaginary part must be positive");
  cfg.law = entry_law(s);
  cfg.threads = s.at_least("threads", 0);
  cfg.spectral = spectral_options(s);
  const BiasReport r = bias_experiment(f, cfg);
  CsvTable table(prov, {"N", "samples", "avg_re", "avg_im", "S_re", "S_im", "bias_over_N_re", "bias_over_N_im",
                        "deviation", "residual", "stderr"});
  if (r.rows.size() >= 2) {
    table.add_note("deviation_slope", format_real(r.deviation_slope));
    table.add_note("residual_slope", format_real(r.residual_slope));
  }
  for (const auto& row : r.rows)
    table.add_row({std::to_string(row.N), std::to_string(row.samples), format_real(row.avg.real()),
                   format_real(row.avg.imag()), format_real(row.limit.real()), format_real(row.limit.imag()),
                   format_real(row.bias_over_N.real()), format_real(row.bias_over_N.imag()),
                   format_real(row.deviation), format_real(row.residual), format_real(row.std_error)});
  write_text(s.text("out"), table.str());
  return kOk;
}

int cmd_identities(const Settings& s, const Provenance& prov) {
  const MatrixPolynomial f = load_polynomial(s);
  SaltDesign d;
  try {
    d = linearize(f);
  } catch (const Error& e) {
    s.fail("poly", e.what());
  }
  const int n = s.at_least("n", 4);
  IdentityOptions o;
  o.z = s.complex("z");
  if (!(o.z.imag() > 0.0)) s.fail("z", "imaginary part must be positive");
  o.t = s.real("t");
  if (o.t < 0.0) s.fail("t", "must be nonnegative");
  o.subset_trials = s.at_least("subsets", 0);
  o.law = entry_law(s);
  const double tolerance = s.positive("tolerance");
  const IdentityReport report = check_identities(d, n, s.seed("seed"), o);

  json doc;
  doc["N"] = n;
  doc["sample_seed"] = report.seed;
  doc["tolerance"] = tolerance;
  json list = json::array();
  bool ok = true;
  for (const auto& r : report.results) {
    const bool pass = r.deviation <= tolerance;
    ok = ok && pass;
    list.push_back({{"name", r.name}, {"deviation", round12(r.deviation)}, {"evaluations", r.evaluations},
                    {"pass", pass}});
  }
  doc["identities"] = list;
  doc["max_deviation"] = round12(report.max_deviation());
  doc["pass"] = ok;
  write_text(s.text("out"), json_report(prov, doc));
  return ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freespec: spectra of polynomials in free semicircular variables and Wigner matrices"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const std::vector<Field> support_extra{{"support_tol", Kind::Real, SupportOptions{}.tol, "edge accuracy target"}};
  std::vector<Command> commands;
  commands.reserve(7);
  commands.emplace_back(app, "linearize", "emit (and optionally verify) a self-adjoint linearization as JSON",
                        concat({polynomial_fields(),
                                {{"verify", Kind::Bool, false, "check the corner-block identity on random inputs"},
                                 {"trials", Kind::Int, 20, "verification trials"},
                                 {"seed", Kind::Seed, 1, "verification seed"}},
                                output_fields()}),
                        cmd_linearize);
  commands.emplace_back(app, "density", "limiting spectral density on a grid (CSV)",
                        concat({polynomial_fields(),
                                {{"xmin", Kind::Real, -3.0, "grid start"},
                                 {"xmax", Kind::Real, 3.0, "grid end"},
                                 {"points", Kind::Int, 600, "grid points"},
                                 {"epsilon", Kind::Real, 1e-3, "distance of the evaluation line to the real axis"}},
                                solver_fields(), output_fields()}),
                        cmd_density);
  commands.emplace_back(app, "support", "support of the limiting spectral distribution (JSON intervals)",
                        concat({polynomial_fields(), support_extra, solver_fields(), output_fields()}), cmd_support);
  commands.emplace_back(app, "norm", "operator norm of the polynomial in free semicircular variables",
                        concat({polynomial_fields(), support_extra, solver_fields(), output_fields()}), cmd_norm);
  commands.emplace_back(app, "simulate", "Monte Carlo convergence report for extreme eigenvalues (CSV)",
                        concat({polynomial_fields(),
                                {{"law", Kind::Text, "gaussian", "entry law: gaussian, rademacher, uniform[:C]"},
                                 {"sizes", Kind::IntList, json::array({100, 400, 1600}), "matrix sizes N"},
                                 {"samples", Kind::Int, 10, "samples per N"},
                                 {"seed", Kind::Seed, 1, "master seed"},
                                 {"epsilon", Kind::Real, 0.3, "support fattening for outlier counts"},
                                 {"threads", Kind::Int, 0, "worker threads (0: FREESPEC_THREADS or all cores)"}},
                                support_extra, solver_fields(), output_fields()}),
                        cmd_simulate);
  commands.emplace_back(app, "bias-check", "Monte Carlo Stieltjes transform against limit and 1/N correction (CSV)",
                        concat({polynomial_fields("x1"),
                                {{"law", Kind::Text, "gaussian", "entry law: gaussian, rademacher, uniform[:C]"},
                                 {"z", Kind::Complex, "0+2i", "spectral parameter a+bi"},
                                 {"sizes", Kind::IntList, json::array({50, 100, 200, 400, 800}), "matrix sizes N"},
                                 {"samples", Kind::Int, 2000, "samples per N"},
                                 {"seed", Kind::Seed, 1, "master seed"},
                                 {"threads", Kind::Int, 0, "worker threads (0: FREESPEC_THREADS or all cores)"}},
                                solver_fields(), output_fields()}),
                        cmd_bias);
  commands.emplace_back(app, "identities", "exact resolvent identity suite on a sampled block matrix (JSON)",
                        concat({polynomial_fields("x1*x2 + x2*x1"),
                                {{"n", Kind::Int, 8, "matrix size N (at least 4)"},
                                 {"seed", Kind::Seed, 1, "sample seed"},
                                 {"z", Kind::Complex, "0.3+0.8i", "spectral parameter a+bi"},
                                 {"t", Kind::Real, 0.5, "extra imaginary shift"},
                                 {"subsets", Kind::Int, 3, "random index subsets besides the full set"},
                                 {"law", Kind::Text, "gaussian", "entry law"},
                                 {"tolerance", Kind::Real, 1e-9, "largest acceptable deviation"}},
                                output_fields()}),
                        cmd_identities);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  try {
    for (const auto& c : commands)
      if (c.selected()) return c.run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
