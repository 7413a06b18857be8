#include "ppg2ecg/dataset/batches.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ppg2ecg::dataset {

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::uint64_t epoch,
                                                    bool drop_last) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < batches_per_epoch(n, batch_size, drop_last); ++i) {
    const std::size_t end = std::min(n, (i + 1) * batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i * batch_size),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace ppg2ecg::dataset
