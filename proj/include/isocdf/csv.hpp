#pragma once

// Small CSV helpers for the command-line tools: "x,y" observation files in,
// band/trial tables out.  Numbers are written with 17 significant digits so
// that doubles survive a round trip through text.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isocdf/design.hpp"

namespace isocdf {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Reads a CSV file with header "x,y"; reports malformed rows by line number.
inline std::vector<Observation> read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty file: " + path);
  std::vector<Observation> obs;
  int line_no = 1;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + what);
  };
  // header must name the two columns
  {
    std::string h = line;
    h.erase(std::remove_if(h.begin(), h.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            h.end());
    if (h != "x,y") fail("expected header \"x,y\"");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail("expected two comma-separated fields");
    std::size_t used = 0;
    Observation o{};
    try {
      o.x = std::stod(line.substr(0, comma), &used);
      if (used != comma) fail("trailing characters in x field");
      const std::string ytext = line.substr(comma + 1);
      o.y = std::stod(ytext, &used);
      while (used < ytext.size() && std::isspace(static_cast<unsigned char>(ytext[used])))
        ++used;
      if (used != ytext.size()) fail("trailing characters in y field");
    } catch (const std::invalid_argument&) {
      fail("non-numeric field");
    } catch (const std::out_of_range&) {
      fail("number out of range");
    }
    obs.push_back(o);
  }
  if (obs.empty()) throw std::invalid_argument(path + ": no data rows");
  return obs;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace isocdf
