#pragma once

#include <map>
#include <string>
#include <vector>

#include "quadsim/model.hpp"

namespace quadsim {

/// Flat `key = value` text file with `#` comments. Section headers in
/// square brackets switch the target map for the lines that follow;
/// rows inside a section are kept verbatim (used by scenario schedules).
struct KeyValueFile {
  std::map<std::string, std::string> values;                       // top-level keys
  std::map<std::string, std::vector<std::string>> section_rows;    // [name] -> raw rows

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
};

/// Throws std::runtime_error naming the line number on malformed input.
KeyValueFile parse_key_value(const std::string& text);
KeyValueFile load_key_value_file(const std::string& path);

std::string trim(const std::string& s);
std::vector<std::string> split_csv_row(const std::string& row);

QuadcopterParams params_from_kv(const KeyValueFile& kv);
PropellerModel propeller_from_kv(const KeyValueFile& kv);

void write_params_file(const std::string& path, const QuadcopterParams& p,
                       const PropellerModel& m);

}  // namespace quadsim
