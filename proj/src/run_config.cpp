#include "alignrecon/run_config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace alignrecon {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw InvalidSpec("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || errno == ERANGE || *end != '\0') bad_value(key, v, "a number");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  char* end = nullptr;
  errno = 0;
  const long long n = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || errno == ERANGE || *end != '\0') bad_value(key, v, "an integer");
  return n;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  if (s.empty() || s[0] == '-') bad_value(key, v, "a non-negative integer");
  char* end = nullptr;
  errno = 0;
  const unsigned long long n = std::strtoull(s.c_str(), &end, 10);
  if (errno == ERANGE || *end != '\0') bad_value(key, v, "a non-negative integer");
  return n;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

int to_count(const std::string& key, const std::string& v) {
  const long long n = to_int(key, v);
  if (n < 0 || n > 1'000'000) bad_value(key, v, "a count in [0, 1000000]");
  return static_cast<int>(n);
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto real = [&f](const char* key, double SolverConfig::*m) {
      f.push_back({key, [key, m](RunConfig& c, const std::string& v) { c.solver.*m = to_double(key, v); },
                   [m](const RunConfig& c) { return fmt(c.solver.*m); }});
    };
    auto count = [&f](const char* key, int SolverConfig::*m) {
      f.push_back({key, [key, m](RunConfig& c, const std::string& v) { c.solver.*m = to_count(key, v); },
                   [m](const RunConfig& c) { return std::to_string(c.solver.*m); }});
    };
    count("stages", &SolverConfig::stages);
    real("alpha", &SolverConfig::alpha);
    real("lambda", &SolverConfig::lambda);
    real("eta", &SolverConfig::eta);
    real("beta1", &SolverConfig::beta1);
    real("beta2", &SolverConfig::beta2);
    count("prox_inner", &SolverConfig::prox_inner);
    count("align_substeps", &SolverConfig::align_substeps);
    real("smooth_sigma", &SolverConfig::smooth_sigma);
    count("align_start", &SolverConfig::align_start);
    count("align_search", &SolverConfig::align_search);
    count("align_search_local", &SolverConfig::align_search_local);
    real("align_tol", &SolverConfig::align_tol);
    real("eps", &SolverConfig::eps);
    real("delta", &SolverConfig::delta);
    real("align_eps", &SolverConfig::align_eps);

    f.push_back({"size",
                 [](RunConfig& c, const std::string& v) {
                   c.experiment.size = static_cast<std::size_t>(to_u64("size", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.experiment.size); }});
    f.push_back({"accel", [](RunConfig& c, const std::string& v) { c.experiment.acceleration = to_double("accel", v); },
                 [](const RunConfig& c) { return fmt(c.experiment.acceleration); }});
    f.push_back({"pattern",
                 [](RunConfig& c, const std::string& v) { c.experiment.pattern = parse_mask_pattern(trim(v)); },
                 [](const RunConfig& c) { return to_string(c.experiment.pattern); }});
    f.push_back({"center_alloc",
                 [](RunConfig& c, const std::string& v) { c.experiment.center_alloc = to_double("center_alloc", v); },
                 [](const RunConfig& c) { return fmt(c.experiment.center_alloc); }});
    f.push_back({"noise_sigma",
                 [](RunConfig& c, const std::string& v) { c.experiment.noise_sigma = to_double("noise_sigma", v); },
                 [](const RunConfig& c) { return fmt(c.experiment.noise_sigma); }});
    f.push_back({"sigma",
                 [](RunConfig& c, const std::string& v) { c.experiment.misalign_sigma = to_double("sigma", v); },
                 [](const RunConfig& c) { return fmt(c.experiment.misalign_sigma); }});
    f.push_back({"seed", [](RunConfig& c, const std::string& v) { c.experiment.seed = to_u64("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.experiment.seed); }});
    f.push_back({"seeds",
                 [](RunConfig& c, const std::string& v) {
                   c.seeds.clear();
                   for (const auto& s : split_list(v)) c.seeds.push_back(to_u64("seeds", s));
                 },
                 [](const RunConfig& c) { return join(c.seeds); }});
    f.push_back({"sweep_axis",
                 [](RunConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s == "sigma")
                     c.sweep_axis = SweepAxis::Sigma;
                   else if (s == "stages")
                     c.sweep_axis = SweepAxis::Stages;
                   else
                     bad_value("sweep_axis", v, "sigma or stages");
                 },
                 [](const RunConfig& c) { return to_string(c.sweep_axis); }});
    f.push_back({"sweep_values",
                 [](RunConfig& c, const std::string& v) {
                   c.sweep_values.clear();
                   for (const auto& s : split_list(v)) c.sweep_values.push_back(to_double("sweep_values", s));
                 },
                 [](const RunConfig& c) { return join(c.sweep_values); }});
    f.push_back({"threads",
                 [](RunConfig& c, const std::string& v) { c.threads = static_cast<unsigned>(to_count("threads", v)); },
                 [](const RunConfig& c) { return std::to_string(c.threads); }});
    f.push_back({"align", [](RunConfig& c, const std::string& v) { c.align = to_bool("align", v); },
                 [](const RunConfig& c) { return std::string(c.align ? "true" : "false"); }});
    f.push_back({"use_ref", [](RunConfig& c, const std::string& v) { c.use_ref = to_bool("use_ref", v); },
                 [](const RunConfig& c) { return std::string(c.use_ref ? "true" : "false"); }});
    f.push_back({"out", [](RunConfig& c, const std::string& v) { c.out = trim(v); },
                 [](const RunConfig& c) { return c.out.string(); }});
    return f;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  solver.validate();
  if (experiment.size < 64) throw InvalidSpec("size must be >= 64");
  MaskSpec{experiment.size, experiment.acceleration, experiment.center_alloc, 0}.validate();
  if (!(experiment.noise_sigma >= 0.0) || !std::isfinite(experiment.noise_sigma))
    throw InvalidSpec("noise_sigma must be a finite value >= 0");
  if (!(experiment.misalign_sigma >= 0.0) || !std::isfinite(experiment.misalign_sigma))
    throw InvalidSpec("sigma must be a finite value >= 0");
  if (seeds.empty()) throw InvalidSpec("seeds must list at least one seed");
  if (sweep_values.empty()) throw InvalidSpec("sweep_values must list at least one value");
  for (double v : sweep_values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidSpec("sweep_values must be finite and >= 0");
    if (sweep_axis == SweepAxis::Stages && v != std::floor(v))
      throw InvalidSpec("stage sweep values must be integers");
  }
  if (out.empty()) throw InvalidSpec("out must not be empty");
}

void set_run_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  throw InvalidSpec("unknown config key '" + key + "'");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidSpec("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second)
      throw InvalidSpec("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    try {
      set_run_config_value(cfg, key, line.substr(eq + 1));
    } catch (const InvalidSpec& e) {
      throw InvalidSpec("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_run_config(cfg);
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

}  // namespace alignrecon
