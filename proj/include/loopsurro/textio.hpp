#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loopsurro {

// 17 significant digits: round-trips every double.
std::string format_double(double v);
double parse_double(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Ordered "key = value" text. Lines starting with '#' are comments.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // ConsistencyError if absent
  std::optional<std::string> find(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_string() const;
  static KeyValues parse(std::string_view text);
  void save(const std::string& path) const;
  static KeyValues load(const std::string& path);

  friend bool operator==(const KeyValues&, const KeyValues&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Run manifest: key-value record of everything a command consumed. The hash
// covers every entry except `hash` itself and keys ending in "timestamp".
class RunManifest {
 public:
  KeyValues values;

  std::string compute_hash() const;
  // Stores the hash under "hash" and returns it.
  std::string seal();
  void save(const std::string& path) const { values.save(path); }
  static RunManifest load(const std::string& path);
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // leading '#' lines, without the '#'

  std::size_t column(const std::string& name) const;  // ConsistencyError if absent
};

// Writes "# <comment>" lines first, then header and rows.
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace loopsurro
