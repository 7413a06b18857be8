#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ppg2ecg::dataset {

/// Indices of each batch in one epoch: a permutation of [0, n) seeded by
/// (seed, epoch), cut into batches of `batch_size`. The short tail is dropped
/// unless `drop_last` is false.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::uint64_t epoch,
                                                    bool drop_last = true);

inline std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size, bool drop_last = true) {
  return drop_last ? n / batch_size : (n + batch_size - 1) / batch_size;
}

}  // namespace ppg2ecg::dataset
