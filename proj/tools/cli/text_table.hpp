#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hazrisk::cli {

// Right-aligned fixed-width columns, header underlined with dashes.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  void print(std::ostream& out) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Fixed-point with the given number of decimals; "nan" for non-finite.
std::string fmt(double v, int decimals = 4);

}  // namespace hazrisk::cli
