#pragma once

#include <istream>
#include <string>
#include <vector>

#include "hazrisk/survival.hpp"

namespace hazrisk {

// Reads survival data from CSV with a header row. Required columns: x,
// time, status (0/1); optional: group (integer). Column order is free and
// unknown columns are ignored. Throws InputError with the 1-based line
// number of the first invalid row.
std::vector<SurvivalSample> read_survival_csv(std::istream& in);
std::vector<SurvivalSample> read_survival_csv_file(const std::string& path);

void write_survival_csv(std::ostream& out,
                        const std::vector<SurvivalSample>& samples);

}  // namespace hazrisk
