#include "ucmlab/app/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "ucmlab/format.hpp"

namespace ucmlab::app {

namespace pt = boost::property_tree;

namespace {

// Drops a trailing "; ..." or "# ..." comment.
std::string strip_comment(const std::string& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if ((v[i] == ';' || v[i] == '#') && (i == 0 || v[i - 1] == ' ' || v[i - 1] == '\t'))
      return std::string(trim(std::string_view(v).substr(0, i)));
  return std::string(trim(v));
}

std::string where(const std::string& s, const std::string& k) { return "[" + s + "] " + k; }

}  // namespace

Config Config::from_string(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Config c;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError("config: key outside any section: " + section);
    for (const auto& [key, node] : body) c.file_[section][key] = strip_comment(node.data());
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = file_.find(section);
  return s != file_.end() && s->second.count(key) > 0;
}

std::string Config::raw(const std::string& section, const std::string& key) const {
  return file_.at(section).at(key);
}

void Config::record(const std::string& section, const std::string& key, const std::string& value) {
  used_.insert({section, key});
  auto& v = resolved_[section];
  auto it = std::find_if(v.begin(), v.end(), [&](const auto& kv) { return kv.first == key; });
  if (it == v.end())
    v.emplace_back(key, value);
  else
    it->second = value;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  file_[section][key] = value;
  record(section, key, value);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& def) {
  const std::string v = has(section, key) ? raw(section, key) : def;
  record(section, key, v);
  return v;
}

std::string Config::require_string(const std::string& section, const std::string& key) {
  if (!has(section, key)) throw ConfigError("config: missing required key " + where(section, key));
  return get_string(section, key, "");
}

double Config::get_double(const std::string& section, const std::string& key, double def) {
  double v = def;
  if (has(section, key)) {
    try {
      v = parse_double(raw(section, key));
    } catch (const std::exception&) {
      throw ConfigError("config: " + where(section, key) + " is not a number: " + raw(section, key));
    }
  }
  record(section, key, format_double(v));
  return v;
}

long long Config::get_int(const std::string& section, const std::string& key, long long def) {
  long long v = def;
  if (has(section, key)) {
    try {
      v = parse_int(raw(section, key));
    } catch (const std::exception&) {
      throw ConfigError("config: " + where(section, key) + " is not an integer: " + raw(section, key));
    }
  }
  record(section, key, std::to_string(v));
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool def) {
  bool v = def;
  if (has(section, key)) {
    const std::string s = raw(section, key);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
      v = true;
    else if (s == "false" || s == "0" || s == "no" || s == "off")
      v = false;
    else
      throw ConfigError("config: " + where(section, key) + " is not a boolean: " + s);
  }
  record(section, key, v ? "true" : "false");
  return v;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& def) {
  std::vector<double> v = def;
  if (has(section, key)) {
    v.clear();
    std::string s = raw(section, key);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      try {
        v.push_back(parse_double(tok));
      } catch (const std::exception&) {
        throw ConfigError("config: " + where(section, key) + " has a non-numeric entry: " + tok);
      }
    }
    if (v.empty()) throw ConfigError("config: " + where(section, key) + " is empty");
  }
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  record(section, key, out);
  return v;
}

std::string Config::get_choice(const std::string& section, const std::string& key,
                               const std::string& def, const std::vector<std::string>& choices) {
  const std::string v = get_string(section, key, def);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    std::string all;
    for (const auto& c : choices) all += (all.empty() ? "" : " | ") + c;
    throw ConfigError("config: " + where(section, key) + " must be one of " + all + ", got " + v);
  }
  return v;
}

void Config::finish() const {
  std::string unknown;
  for (const auto& [section, keys] : file_)
    for (const auto& [key, value] : keys)
      if (!used_.count({section, key})) unknown += (unknown.empty() ? "" : ", ") + where(section, key);
  if (!unknown.empty()) throw ConfigError("config: unknown keys: " + unknown);
}

std::string Config::effective() const {
  static const std::vector<std::string> order = {"system", "params", "grid",  "bc",    "initial",
                                                 "solver", "check",  "stokes", "study", "spectrum",
                                                 "output"};
  std::vector<std::string> sections = order;
  for (const auto& [s, v] : resolved_)
    if (std::find(order.begin(), order.end(), s) == order.end()) sections.push_back(s);
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sections) {
    auto it = resolved_.find(s);
    if (it == resolved_.end()) continue;
    if (!first) os << "\n";
    first = false;
    os << "[" << s << "]\n";
    for (const auto& [k, v] : it->second) os << k << " = " << v << "\n";
  }
  return os.str();
}

}  // namespace ucmlab::app
