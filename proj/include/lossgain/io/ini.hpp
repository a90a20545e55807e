#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lossgain/core/errors.hpp"

namespace lossgain::io {

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/**
 * @brief Sectioned key = value text with '#' or ';' comments.
 *
 * Keys are unique within a section; sections may not repeat. Every entry
 * keeps its line number so later validation can report locations.
 */
class IniDocument {
 public:
  static IniDocument parse(std::istream& in) {
    IniDocument doc;
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError("unterminated section header", line_no);
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ParseError("empty section name", line_no);
        if (doc.sections_.count(section)) throw ParseError("section [" + section + "] appears twice", line_no);
        doc.sections_[section];
        doc.section_lines_[section] = line_no;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError("missing key before '='", line_no);
      if (section.empty()) throw ParseError("entry outside any section", line_no, key);
      auto& entries = doc.sections_[section];
      for (const auto& e : entries)
        if (e.key == key) throw ParseError("duplicate key (first on line " + std::to_string(e.line) + ")", line_no, key);
      entries.push_back({key, value, line_no});
    }
    return doc;
  }

  static IniDocument parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static IniDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    return parse(in);
  }

  bool has_section(const std::string& name) const { return sections_.count(name) > 0; }

  const std::vector<IniEntry>& entries(const std::string& section) const {
    static const std::vector<IniEntry> empty;
    auto it = sections_.find(section);
    return it == sections_.end() ? empty : it->second;
  }

  const IniEntry* find(const std::string& section, const std::string& key) const {
    for (const auto& e : entries(section))
      if (e.key == key) return &e;
    return nullptr;
  }

  int section_line(const std::string& section) const {
    auto it = section_lines_.find(section);
    return it == section_lines_.end() ? 0 : it->second;
  }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : sections_) out.push_back(name);
    return out;
  }

  /// Rejects sections outside `allowed`.
  void require_sections(const std::set<std::string>& allowed) const {
    for (const auto& [name, _] : sections_)
      if (!allowed.count(name)) throw ParseError("unknown section [" + name + "]", section_line(name));
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::vector<IniEntry>> sections_;
  std::map<std::string, int> section_lines_;
};

inline double parse_double(const IniEntry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("expected a number, got '" + e.value + "'", e.line, e.key);
  return v;
}

inline long long parse_integer(const IniEntry& e) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("expected an integer, got '" + e.value + "'", e.line, e.key);
  return v;
}

/// Comma- or whitespace-separated list of numbers.
inline std::vector<double> parse_list(const IniEntry& e) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    IniEntry item{e.key, token, e.line};
    out.push_back(parse_double(item));
    token.clear();
  };
  for (char c : e.value) {
    if (c == ',' || c == ' ' || c == '\t') flush();
    else token.push_back(c);
  }
  flush();
  if (out.empty()) throw ParseError("expected a list of numbers", e.line, e.key);
  return out;
}

inline bool parse_bool(const IniEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ParseError("expected true or false, got '" + e.value + "'", e.line, e.key);
}

}  // namespace lossgain::io
