#pragma once

#include <filesystem>
#include <string>

#include "rjbma/data_model.hpp"

namespace rjbma {

// Numeric CSV with a header row. Fields may be double-quoted; '.' is the
// decimal point. Parse errors name the line; an empty body is an error.
Table read_csv(const std::filesystem::path& path);
Table parse_csv(const std::string& text);

// read_csv followed by validate_dataset.
Dataset load_csv(const std::filesystem::path& path, const std::string& outcome_name,
                 const std::string& exposure_name, const CandidateSpec& spec);

// Writes values in shortest round-trip form.
void write_csv(const std::filesystem::path& path, const Table& table);
std::string format_csv(const Table& table);

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace rjbma
