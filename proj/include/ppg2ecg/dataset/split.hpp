#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppg2ecg::dataset {

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

void to_json(nlohmann::json& j, const SplitAssignment& s);
void from_json(const nlohmann::json& j, SplitAssignment& s);

/// Validation and test each get max(1, floor(n / 5)) subjects and train the
/// rest (9/3/3 for 15, 4/1/1 for 6). Membership is a seeded shuffle of the
/// sorted ids. Throws InputError for fewer than 3 subjects or duplicate ids.
SplitAssignment make_split(std::vector<std::string> subjects, std::uint64_t seed);

/// Throws InputError if any id appears in more than one split.
void check_disjoint(const SplitAssignment& s);

}  // namespace ppg2ecg::dataset
