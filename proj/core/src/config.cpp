#include "platoon/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace platoon {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(context + ": not a number: '" + text + "'");
  }
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& name) {
  ConfigFile cfg;
  cfg.name_ = name;

  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name + ":" + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(name + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(line_no) + ": expected key = value");
    Entry entry;
    entry.section = section;
    entry.key = trim(line.substr(0, eq));
    entry.value = trim(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    cfg.entries_.push_back(std::move(entry));
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return get(section, key).has_value();
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
  const Entry* found = nullptr;
  for (const Entry& e : entries_)
    if (e.section == section && e.key == key) found = &e;  // last one wins
  if (!found) return std::nullopt;
  return found->value;
}

std::vector<const ConfigFile::Entry*> ConfigFile::get_all(const std::string& section,
                                                          const std::string& key) const {
  std::vector<const Entry*> out;
  for (const Entry& e : entries_)
    if (e.section == section && e.key == key) out.push_back(&e);
  return out;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  return parse_double(*v, name_ + ": [" + section + "] " + key);
}

double ConfigFile::require_double(const std::string& section, const std::string& key) const {
  const auto v = get(section, key);
  if (!v) throw ConfigError(name_ + ": missing required key [" + section + "] " + key);
  return parse_double(*v, name_ + ": [" + section + "] " + key);
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              long long fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long out = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError(name_ + ": [" + section + "] " + key + ": not an integer: '" + *v + "'");
  }
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

std::vector<double> ConfigFile::get_list(const std::string& section,
                                         const std::string& key) const {
  const auto v = get(section, key);
  if (!v) return {};
  return parse_number_list(*v, name_ + ": [" + section + "] " + key);
}

std::vector<double> ConfigFile::parse_number_list(const std::string& text,
                                                  const std::string& context) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) throw ConfigError(context + ": empty list element");
    out.push_back(parse_double(cell, context));
  }
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
  entries_.push_back(Entry{section, key, value, 0});
}

}  // namespace platoon
