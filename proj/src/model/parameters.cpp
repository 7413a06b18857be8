#include "ppg2ecg/model/parameters.hpp"

#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ppg2ecg::model {

template <typename T>
std::size_t ParameterSet<T>::add(std::string name, std::vector<int> shape, Init init) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  const auto n = static_cast<std::size_t>(
      std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>()));
  ParameterInfo p{std::move(name), std::move(shape), init, values_.size(), n};
  values_.resize(values_.size() + n, T(0));
  info_.push_back(std::move(p));
  return info_.size() - 1;
}

template <typename T>
void ParameterSet<T>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kWeightStddev);
  for (const auto& p : info_) {
    auto v = values(static_cast<std::size_t>(&p - info_.data()));
    switch (p.init) {
      case Init::Normal:
        for (T& x : v) x = static_cast<T>(normal(rng));
        break;
      case Init::Zeros:
        std::fill(v.begin(), v.end(), T(0));
        break;
      case Init::Ones:
        std::fill(v.begin(), v.end(), T(1));
        break;
    }
  }
}

template <typename T>
std::optional<std::size_t> ParameterSet<T>::find(const std::string& name) const {
  for (std::size_t i = 0; i < info_.size(); ++i) {
    if (info_[i].name == name) return i;
  }
  return std::nullopt;
}

template <typename T>
std::span<T> ParameterSet<T>::values(std::size_t index) {
  const auto& p = info_.at(index);
  return std::span<T>(values_).subspan(p.offset, p.size);
}

template <typename T>
std::span<const T> ParameterSet<T>::values(std::size_t index) const {
  const auto& p = info_.at(index);
  return std::span<const T>(values_).subspan(p.offset, p.size);
}

template <typename T>
std::span<T> ParameterSet<T>::slice(std::span<T> buffer, std::size_t index) const {
  if (buffer.empty()) return {};
  const auto& p = info_.at(index);
  return buffer.subspan(p.offset, p.size);
}

template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace ppg2ecg::model
