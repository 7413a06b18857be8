#include "ppg2ecg/model/config.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::model {

void GeneratorConfig::validate() const {
  if (encoder_filters.empty() || encoder_filters.size() != encoder_strides.size()) {
    throw InputError("generator: encoder_filters and encoder_strides must be non-empty and equal length");
  }
  for (int f : encoder_filters) {
    if (f < 1) throw InputError("generator: filter counts must be positive");
  }
  for (int s : encoder_strides) {
    if (s != 1 && s != 2) throw InputError("generator: strides must be 1 or 2");
  }
  if (kernel_size < 1) throw InputError("generator: kernel_size must be positive");
  if (input_length < 1 || input_length % length_multiple() != 0) {
    throw InputError("generator: input_length must be a positive multiple of " +
                     std::to_string(length_multiple()));
  }
}

int GeneratorConfig::length_multiple() const {
  int m = 1;
  for (int s : encoder_strides) m *= s;
  return m;
}

void DiscriminatorConfig::validate() const {
  if (filters.empty()) throw InputError("discriminator: filters must be non-empty");
  for (int f : filters) {
    if (f < 1) throw InputError("discriminator: filter counts must be positive");
  }
  if (kernel_size < 1 || stride < 1) {
    throw InputError("discriminator: kernel_size and stride must be positive");
  }
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = {{"encoder_filters", c.encoder_filters},
       {"encoder_strides", c.encoder_strides},
       {"kernel_size", c.kernel_size},
       {"input_length", c.input_length},
       {"attention_gates", c.attention_gates}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  c = GeneratorConfig{};
  c.encoder_filters = j.value("encoder_filters", c.encoder_filters);
  c.encoder_strides = j.value("encoder_strides", c.encoder_strides);
  c.kernel_size = j.value("kernel_size", c.kernel_size);
  c.input_length = j.value("input_length", c.input_length);
  c.attention_gates = j.value("attention_gates", c.attention_gates);
}

void to_json(nlohmann::json& j, const DiscriminatorConfig& c) {
  j = {{"filters", c.filters}, {"kernel_size", c.kernel_size}, {"stride", c.stride}};
}

void from_json(const nlohmann::json& j, DiscriminatorConfig& c) {
  c = DiscriminatorConfig{};
  c.filters = j.value("filters", c.filters);
  c.kernel_size = j.value("kernel_size", c.kernel_size);
  c.stride = j.value("stride", c.stride);
}

std::size_t conv_parameter_count(int in_channels, int out_channels, int kernel, bool bias) {
  return static_cast<std::size_t>(kernel) * in_channels * out_channels +
         (bias ? static_cast<std::size_t>(out_channels) : 0);
}

std::size_t parameter_count(const GeneratorConfig& c) {
  const auto& f = c.encoder_filters;
  const std::size_t n = f.size();
  const int k = c.kernel_size;
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += conv_parameter_count(i == 0 ? 1 : f[i - 1], f[i], k) + 2 * f[i];
  }
  for (std::size_t i = n - 1; i >= 1; --i) {
    const int in = (i == n - 1) ? f[i] : 2 * f[i];
    total += conv_parameter_count(in, f[i - 1], k) + 2 * f[i - 1];
    if (c.attention_gates) {
      const int inter = std::max(f[i - 1] / 2, 1);
      total += conv_parameter_count(f[i - 1], inter, 1, false);  // skip path
      total += conv_parameter_count(f[i - 1], inter, 1);         // gating path
      total += conv_parameter_count(inter, 1, 1);                // coefficient
    }
  }
  total += conv_parameter_count(n >= 2 ? 2 * f[0] : f[0], 1, k);
  return total;
}

std::size_t parameter_count(const DiscriminatorConfig& c) {
  std::size_t total = 0;
  int in = 1;
  for (int f : c.filters) {
    total += conv_parameter_count(in, f, c.kernel_size);
    in = f;
  }
  return total + conv_parameter_count(in, 1, c.kernel_size);
}

std::string fingerprint(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ppg2ecg::model
