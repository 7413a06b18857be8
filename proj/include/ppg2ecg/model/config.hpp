#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppg2ecg::model {

struct GeneratorConfig {
  std::vector<int> encoder_filters{64, 128, 256, 512, 512, 512};
  std::vector<int> encoder_strides{2, 2, 2, 1, 1, 1};
  int kernel_size = 16;
  int input_length = 512;
  bool attention_gates = true;

  /// Throws InputError on inconsistent settings.
  void validate() const;
  /// Product of the strides; inputs must be a multiple of it.
  int length_multiple() const;
};

struct DiscriminatorConfig {
  std::vector<int> filters{32, 64, 128, 256, 512};
  int kernel_size = 16;
  int stride = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);
void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);

/// kernel * in * out weights plus `out` biases.
std::size_t conv_parameter_count(int in_channels, int out_channels, int kernel, bool bias = true);

/// Closed-form counts, independent of network construction.
std::size_t parameter_count(const GeneratorConfig& c);
std::size_t parameter_count(const DiscriminatorConfig& c);

/// Stable 64-bit FNV-1a digest of the compact JSON dump (keys sorted), hex.
std::string fingerprint(const nlohmann::json& j);

}  // namespace ppg2ecg::model
