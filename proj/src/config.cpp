#include "limper/config.hpp"

#include <fstream>
#include <sstream>

#include "limper/errors.hpp"

namespace limper {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw FormatError("config key " + key + ": not an integer: " + value);
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw FormatError("config key " + key + ": not a number: " + value);
  return out;
}

std::string hex(double x) {
  std::ostringstream os;
  os << std::hexfloat << x;
  return os.str();
}

}  // namespace

ConstructionConfig parse_config(const std::string& text) {
  ConstructionConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "K" || key == "stages") {
      c.stages = to_int(key, value);
    } else if (key == "L") {
      c.L = to_int(key, value);
    } else if (key == "samples_per_band") {
      c.samples_per_band = to_int(key, value);
    } else if (key == "mode") {
      if (value == "strict") {
        c.mode = Mode::Strict;
      } else if (value == "capped") {
        c.mode = Mode::Capped;
      } else {
        throw FormatError("config key mode: expected strict or capped, got " + value);
      }
    } else if (key == "m0_cap") {
      c.m0_cap = to_int(key, value);
    } else if (key == "m_cap") {
      c.m_cap = to_int(key, value);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "eps") {
      c.eps = to_double(key, value);
    } else if (key == "resolution_floor") {
      c.resolution_floor = to_double(key, value);
    } else if (key == "threads") {
      c.threads = to_int(key, value);
    } else if (key == "search_budget") {
      c.search_budget = to_int(key, value);
    } else if (key == "spectral_samples") {
      c.spectral_samples = to_int(key, value);
    } else {
      throw FormatError("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  if (c.stages < 0) throw FormatError("config key K must be nonnegative");
  if (c.samples_per_band < 1) throw FormatError("config key samples_per_band must be positive");
  if (c.m0_cap < 1 || c.m_cap < 1) throw FormatError("config caps must be positive");
  if (!(c.eps > 0.0)) throw FormatError("config key eps must be positive");
  if (!(c.resolution_floor > 0.0)) throw FormatError("config key resolution_floor must be positive");
  return c;
}

ConstructionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_text(const ConstructionConfig& c) {
  std::ostringstream os;
  os << "K=" << c.stages << "\n"
     << "L=" << c.L << "\n"
     << "samples_per_band=" << c.samples_per_band << "\n"
     << "mode=" << (c.mode == Mode::Strict ? "strict" : "capped") << "\n"
     << "m0_cap=" << c.m0_cap << "\n"
     << "m_cap=" << c.m_cap << "\n"
     << "seed=" << c.seed << "\n"
     << "eps=" << hex(c.eps) << "\n"
     << "resolution_floor=" << hex(c.resolution_floor) << "\n"
     << "threads=" << c.threads << "\n"
     << "search_budget=" << c.search_budget << "\n"
     << "spectral_samples=" << c.spectral_samples << "\n";
  return os.str();
}

}  // namespace limper
