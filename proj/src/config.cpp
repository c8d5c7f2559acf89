#include "kreinlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "kreinlab/errors.hpp"

namespace kreinlab {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

double parse_real(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw ValidationError(key, "expected a finite real number, got '" + value + "'");
  return x;
}

long long parse_integer(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ValidationError(key, "expected an integer, got '" + value + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(trim(value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError(key, "expected a boolean, got '" + value + "'");
}

bool is_auto(const std::string& value) {
  const std::string v = lower(trim(value));
  return v == "auto" || v == "none" || v.empty();
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json("auto");
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(ExperimentConfig&, const std::string& qualified, const std::string& value)> set;
  std::function<nlohmann::json(const ExperimentConfig&)> get;

  std::string qualified() const { return section + "." + name; }
};

template <class T>
Key real_key(std::string section, std::string name, T ExperimentConfig::*field) {
  return Key{std::move(section), std::move(name),
             [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_real(k, v); },
             [field](const ExperimentConfig& c) { return nlohmann::json(c.*field); }};
}

Key int_key(std::string section, std::string name, int ExperimentConfig::*field) {
  return Key{std::move(section), std::move(name),
             [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
               const long long x = parse_integer(k, v);
               if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                 throw ValidationError(k, "integer out of range");
               c.*field = int(x);
             },
             [field](const ExperimentConfig& c) { return nlohmann::json(c.*field); }};
}

Key optional_key(std::string section, std::string name, std::optional<double> ExperimentConfig::*field) {
  return Key{std::move(section), std::move(name),
             [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
               if (is_auto(v))
                 c.*field = std::nullopt;
               else
                 c.*field = parse_real(k, v);
             },
             [field](const ExperimentConfig& c) { return optional_json(c.*field); }};
}

Key bool_key(std::string section, std::string name, bool ExperimentConfig::*field) {
  return Key{std::move(section), std::move(name),
             [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_bool(k, v); },
             [field](const ExperimentConfig& c) { return nlohmann::json(c.*field); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    t.push_back(real_key("mesh", "half_length", &ExperimentConfig::half_length));
    t.push_back(int_key("mesh", "k_per_side", &ExperimentConfig::k_per_side));
    t.push_back(real_key("mesh", "grading_exponent", &ExperimentConfig::grading_exponent));
    t.push_back(real_key("potential", "kappa", &ExperimentConfig::kappa));
    t.push_back(real_key("potential", "beta", &ExperimentConfig::beta));
    t.push_back(bool_key("potential", "zero", &ExperimentConfig::zero_potential));
    t.push_back(optional_key("potential", "cap", &ExperimentConfig::cap));
    t.push_back(optional_key("experiment", "alpha", &ExperimentConfig::alpha));
    t.push_back(real_key("experiment", "alpha_fraction", &ExperimentConfig::alpha_fraction));
    t.push_back(real_key("experiment", "eta", &ExperimentConfig::eta));
    t.push_back(optional_key("experiment", "z", &ExperimentConfig::z));
    t.push_back(real_key("experiment", "margin", &ExperimentConfig::margin));
    t.push_back(Key{"experiment", "specs",
                    [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      auto items = split_list(lower(v));
                      if (items.empty()) throw ValidationError(k, "need at least one extension");
                      for (const auto& s : items)
                        if (s != "friedrichs" && s != "krein" && s != "general")
                          throw ValidationError(k, "unknown extension '" + s + "' (friedrichs, krein, general)");
                      c.specs = std::move(items);
                    },
                    [](const ExperimentConfig& c) { return nlohmann::json(c.specs); }});
    t.push_back(Key{"experiment", "schedule",
                    [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      c.schedule.clear();
                      if (is_auto(v)) return;
                      for (const auto& s : split_list(v)) c.schedule.push_back(parse_real(k, s));
                    },
                    [](const ExperimentConfig& c) {
                      return c.schedule.empty() ? nlohmann::json("auto") : nlohmann::json(c.schedule);
                    }});
    t.push_back(Key{"experiment", "seed",
                    [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      const long long x = parse_integer(k, v);
                      if (x < 0) throw ValidationError(k, "must be >= 0");
                      c.seed = std::uint64_t(x);
                    },
                    [](const ExperimentConfig& c) { return nlohmann::json(c.seed); }});
    t.push_back(int_key("experiment", "random_vectors", &ExperimentConfig::random_vectors));
    t.push_back(int_key("experiment", "norm_iterations", &ExperimentConfig::norm_iterations));
    t.push_back(int_key("experiment", "eigen_k", &ExperimentConfig::eigen_k));
    t.push_back(bool_key("experiment", "refinement", &ExperimentConfig::refinement));
    t.push_back(real_key("general", "q", &ExperimentConfig::general_q));
    t.push_back(Key{"general", "directions",
                    [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      const std::string d = lower(trim(v));
                      if (d != "both" && d != "plus" && d != "minus" && d != "symmetric")
                        throw ValidationError(k, "expected one of both, plus, minus, symmetric");
                      c.general_directions = d;
                    },
                    [](const ExperimentConfig& c) { return nlohmann::json(c.general_directions); }});
    return t;
  }();
  return table;
}

const Key& find_key(const std::string& key) {
  const std::string k = lower(trim(key));
  const Key* found = nullptr;
  int matches = 0;
  for (const auto& entry : keys()) {
    if (entry.qualified() == k) return entry;
    if (entry.name == k) {
      found = &entry;
      ++matches;
    }
  }
  if (matches == 1) return *found;
  if (matches > 1) throw ValidationError(key, "ambiguous key; qualify it as section.key");
  throw ValidationError(key, "unknown configuration key");
}

std::string json_to_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ",";
      out += json_to_text(item);
    }
    return out;
  }
  throw ValidationError("config", "unsupported JSON value " + v.dump());
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError("line " + std::to_string(line_no), "unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      const bool known = std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.section == section; });
      if (!known) throw ValidationError(section, "unknown configuration section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("line " + std::to_string(line_no), "expected key = value");
    std::string key = lower(trim(line.substr(0, eq)));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    const Key& entry = find_key(key);
    entry.set(config, entry.qualified(), trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
  }
  return parse_config(text);
}

void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const Key& entry = find_key(key);
  entry.set(config, entry.qualified(), value);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError(assignment, "override must be key=value");
  apply_override(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : keys()) j[k.section][k.name] = k.get(config);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  const nlohmann::json& body = j.contains("config") ? j.at("config") : j;
  if (!body.is_object()) throw ValidationError("config", "expected a JSON object");
  ExperimentConfig config;
  for (const auto& [section, entries] : body.items()) {
    if (!entries.is_object()) throw ValidationError(section, "expected an object of keys");
    for (const auto& [name, value] : entries.items()) {
      const Key& entry = find_key(section + "." + name);
      entry.set(config, entry.qualified(), json_to_text(value));
    }
  }
  return config;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.qualified());
  return out;
}

}  // namespace kreinlab
