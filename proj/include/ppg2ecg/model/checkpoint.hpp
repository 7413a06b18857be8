#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppg2ecg/model/parameters.hpp"

namespace ppg2ecg::model {

struct StoredTensor {
  std::vector<int> shape;
  std::vector<float> data;
};

/// Named float32 tensors plus a JSON header carrying the config fingerprint,
/// seed and epoch. File layout: 8-byte magic "PPG2ECGK", u32 version, u64
/// header length, header JSON, then little-endian float32 payloads in the
/// order listed by the header's tensor table.
struct Checkpoint {
  std::string fingerprint;
  std::uint64_t seed = 0;
  int epoch = 0;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, StoredTensor> tensors;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes atomically (temporary file then rename).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws InputError on a missing, truncated or malformed file.
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Throws FingerprintMismatch when the stored fingerprint differs.
void require_fingerprint(const Checkpoint& ckpt, const std::string& expected);

template <typename T>
void store(const ParameterSet<T>& params, const std::string& prefix, Checkpoint& ckpt);
/// Throws InputError on a missing tensor or a shape mismatch.
template <typename T>
void restore(const Checkpoint& ckpt, const std::string& prefix, ParameterSet<T>& params);

void store_flat(const std::string& name, const std::vector<float>& values, Checkpoint& ckpt);
std::vector<float> restore_flat(const Checkpoint& ckpt, const std::string& name, std::size_t size);

}  // namespace ppg2ecg::model
