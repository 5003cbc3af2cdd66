#include "quadsim/key_value.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace quadsim {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_row(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double KeyValueFile::get_double(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw std::runtime_error("missing key: " + key);
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (trim(it->second.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("key '" + key + "' has non-numeric value '" + it->second + "'");
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  return static_cast<int>(get_double(key));
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

KeyValueFile parse_key_value(const std::string& text) {
  KeyValueFile kv;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      kv.section_rows[section];  // record even if empty
      continue;
    }
    if (!section.empty()) {
      kv.section_rows[section].push_back(line);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": empty key");
    }
    kv.values[key] = val;
  }
  return kv;
}

KeyValueFile load_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_value(ss.str());
}

QuadcopterParams params_from_kv(const KeyValueFile& kv) {
  QuadcopterParams p;
  p.M = kv.get_double("M");
  p.l = kv.get_double("l");
  p.g = kv.get_double("g");
  p.Jxx = kv.get_double("Jxx");
  p.Jyy = kv.get_double("Jyy");
  p.Jzz = kv.get_double("Jzz");
  p.Jp = kv.get_double("Jp");
  p.gamma1 = kv.get_double("gamma1");
  p.gamma2 = kv.get_double("gamma2");
  return p;
}

PropellerModel propeller_from_kv(const KeyValueFile& kv) {
  PropellerModel m;
  m.h1 = kv.get_double("h1");
  m.h2 = kv.get_double("h2");
  m.c1 = kv.get_double("c1");
  m.g1 = kv.get_double("g1");
  m.g2 = kv.get_double("g2");
  return m;
}

void write_params_file(const std::string& path, const QuadcopterParams& p,
                       const PropellerModel& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  char buf[64];
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out << key << " = " << buf << "\n";
  };
  emit("M", p.M);
  emit("l", p.l);
  emit("g", p.g);
  emit("Jxx", p.Jxx);
  emit("Jyy", p.Jyy);
  emit("Jzz", p.Jzz);
  emit("Jp", p.Jp);
  emit("gamma1", p.gamma1);
  emit("gamma2", p.gamma2);
  emit("h1", m.h1);
  emit("h2", m.h2);
  emit("c1", m.c1);
  emit("g1", m.g1);
  emit("g2", m.g2);
}

}  // namespace quadsim
