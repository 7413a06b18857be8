#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ppg2ecg::model {

enum class Init { Normal, Zeros, Ones };

struct ParameterInfo {
  std::string name;
  std::vector<int> shape;
  Init init = Init::Zeros;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Named tensors of one network stored back to back in a single flat buffer.
/// Gradients and optimizer moments use plain vectors of `size()` aligned with
/// the same offsets.
template <typename T>
class ParameterSet {
 public:
  static constexpr double kWeightStddev = 0.02;

  /// Registers a tensor (zero-filled until `initialize`) and returns its index.
  std::size_t add(std::string name, std::vector<int> shape, Init init);

  /// Weights ~ N(0, 0.02), biases 0, norm scales 1. Draws happen in
  /// registration order from a generator seeded with `seed`.
  void initialize(std::uint64_t seed);

  std::size_t size() const { return values_.size(); }
  std::size_t count() const { return info_.size(); }
  const std::vector<ParameterInfo>& info() const { return info_; }
  const ParameterInfo& info(std::size_t index) const { return info_.at(index); }
  std::optional<std::size_t> find(const std::string& name) const;

  std::span<T> values(std::size_t index);
  std::span<const T> values(std::size_t index) const;
  std::span<T> flat() { return values_; }
  std::span<const T> flat() const { return values_; }

  /// Slice of a gradient buffer laid out like this set.
  std::span<T> slice(std::span<T> buffer, std::size_t index) const;

  std::vector<T> zeros_like() const { return std::vector<T>(values_.size(), T(0)); }

 private:
  std::vector<ParameterInfo> info_;
  std::vector<T> values_;
};

}  // namespace ppg2ecg::model
