#include "harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "racer/errors.hpp"

namespace racer::harness {

std::string fmtFixed(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // Avoid the two spellings of zero.
  if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) return buf + 1;
  return buf;
}

void writeReport(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("writeReport: cannot open " + path);
  f << "# racer-report v1\n";
  for (const auto& kv : rows) f << kv.first << " " << kv.second << "\n";
  if (!f) throw IoError("writeReport: write failed for " + path);
}

std::vector<std::pair<std::string, std::string>> readReport(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("readReport: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# racer-report v1") {
    throw IoError("readReport: missing format header in " + path);
  }
  std::vector<std::pair<std::string, std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw IoError("readReport: malformed row in " + path);
    rows.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return rows;
}

}  // namespace racer::harness
