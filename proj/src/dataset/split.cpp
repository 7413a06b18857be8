#include "ppg2ecg/dataset/split.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::dataset {

void to_json(nlohmann::json& j, const SplitAssignment& s) {
  j = {{"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

void from_json(const nlohmann::json& j, SplitAssignment& s) {
  s.train = j.at("train").get<std::vector<std::string>>();
  s.validation = j.at("validation").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
}

SplitAssignment make_split(std::vector<std::string> subjects, std::uint64_t seed) {
  if (subjects.size() < 3) {
    throw InputError("split needs at least 3 subjects, got " + std::to_string(subjects.size()));
  }
  std::sort(subjects.begin(), subjects.end());
  if (std::adjacent_find(subjects.begin(), subjects.end()) != subjects.end()) {
    throw InputError("duplicate subject ids");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(subjects.begin(), subjects.end(), rng);
  const std::size_t n = subjects.size();
  const std::size_t held = std::max<std::size_t>(1, n / 5);
  SplitAssignment s;
  const auto begin = subjects.begin();
  s.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n - 2 * held));
  s.validation.assign(begin + static_cast<std::ptrdiff_t>(n - 2 * held),
                      begin + static_cast<std::ptrdiff_t>(n - held));
  s.test.assign(begin + static_cast<std::ptrdiff_t>(n - held), subjects.end());
  for (auto* part : {&s.train, &s.validation, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

void check_disjoint(const SplitAssignment& s) {
  std::set<std::string> seen;
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    for (const auto& id : *part) {
      if (!seen.insert(id).second) throw InputError("subject " + id + " appears in two splits");
    }
  }
}

}  // namespace ppg2ecg::dataset
