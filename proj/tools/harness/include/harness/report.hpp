#pragma once

#include <string>
#include <utility>
#include <vector>

namespace racer::harness {

// Fixed-precision value formatting so reports are byte-stable across
// identical runs.
std::string fmtFixed(double v);

// "# racer-report v1" key/value file.
void writeReport(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& rows);
std::vector<std::pair<std::string, std::string>> readReport(const std::string& path);

}  // namespace racer::harness
