#pragma once

#include <string>

#include "circa/model.hpp"

namespace circa {

// On-disk case layout: a directory holding
//   data.csv   header `timestamp,<metric>...`, one row per minute
//   case.json  detect_time, t_ref, t_delay, t_test, sli, and optionally
//              root_causes and fault_type
// Empty cells and non-finite values are rejected (MissingValue).

std::string case_csv(const Case& c);
std::string case_json(const Case& c);
Case case_from_text(const std::string& csv, const std::string& json);

void write_case(const Case& c, const std::string& dir);
Case read_case(const std::string& dir);

}  // namespace circa
