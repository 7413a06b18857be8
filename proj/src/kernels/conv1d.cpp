#include "ppg2ecg/kernels/conv1d.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace ppg2ecg::kernels {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Upper bound on im2col buffer elements; batches are processed in chunks.
constexpr std::size_t kColumnBudget = std::size_t{1} << 23;

void check_sizes(const Conv1dGeometry& g, int batch, std::size_t x, std::size_t w, std::size_t y) {
  const auto b = static_cast<std::size_t>(batch);
  if (x != b * g.in_channels * g.input_length ||
      w != static_cast<std::size_t>(g.out_channels) * g.in_channels * g.kernel ||
      y != b * g.out_channels * g.output_length()) {
    throw std::invalid_argument("conv1d: buffer sizes do not match geometry");
  }
}

int chunk_size(const Conv1dGeometry& g, int batch) {
  const std::size_t per_item =
      static_cast<std::size_t>(g.in_channels) * g.kernel * g.output_length();
  const auto fit = static_cast<int>(std::max<std::size_t>(1, kColumnBudget / per_item));
  return std::min(batch, fit);
}

// Output positions [lo, hi) whose tap k lands inside the input.
std::pair<int, int> valid_range(const Conv1dGeometry& g, int k) {
  const int lout = g.output_length();
  const int off = k - g.pad_left();
  int lo = off >= 0 ? 0 : (-off + g.stride - 1) / g.stride;
  int hi = (g.input_length - 1 - off) >= 0 ? (g.input_length - 1 - off) / g.stride + 1 : 0;
  lo = std::min(lo, lout);
  hi = std::clamp(hi, lo, lout);
  return {lo, hi};
}

template <typename T>
void im2col(const Conv1dGeometry& g, int first, int count, std::span<const T> x, RowMat<T>& col) {
  const int lout = g.output_length();
  const int pad = g.pad_left();
  col.resize(static_cast<Eigen::Index>(g.in_channels) * g.kernel,
             static_cast<Eigen::Index>(count) * lout);
#pragma omp parallel for collapse(2) schedule(static)
  for (int bi = 0; bi < count; ++bi) {
    for (int c = 0; c < g.in_channels; ++c) {
      const T* src = x.data() + (static_cast<std::size_t>(first + bi) * g.in_channels + c) *
                                    g.input_length;
      for (int k = 0; k < g.kernel; ++k) {
        T* dst = col.data() + (static_cast<std::size_t>(c) * g.kernel + k) * col.cols() +
                 static_cast<std::size_t>(bi) * lout;
        const auto [lo, hi] = valid_range(g, k);
        std::fill(dst, dst + lo, T(0));
        std::fill(dst + hi, dst + lout, T(0));
        const T* s0 = src + k - pad;
        if (g.stride == 1) {
          std::copy(s0 + lo, s0 + hi, dst + lo);
        } else {
          for (int t = lo; t < hi; ++t) dst[t] = s0[t * g.stride];
        }
      }
    }
  }
}

template <typename T>
void col2im(const Conv1dGeometry& g, int first, int count, const RowMat<T>& gcol,
            std::span<T> gx) {
  const int lout = g.output_length();
  const int pad = g.pad_left();
#pragma omp parallel for collapse(2) schedule(static)
  for (int bi = 0; bi < count; ++bi) {
    for (int c = 0; c < g.in_channels; ++c) {
      T* dst = gx.data() + (static_cast<std::size_t>(first + bi) * g.in_channels + c) *
                               g.input_length;
      std::fill(dst, dst + g.input_length, T(0));
      for (int k = 0; k < g.kernel; ++k) {
        const T* src = gcol.data() + (static_cast<std::size_t>(c) * g.kernel + k) * gcol.cols() +
                       static_cast<std::size_t>(bi) * lout;
        const auto [lo, hi] = valid_range(g, k);
        T* d0 = dst + k - pad;
        for (int t = lo; t < hi; ++t) d0[t * g.stride] += src[t];
      }
    }
  }
}

// Few output channels (e.g. a 1-channel head): im2col would materialize a
// matrix kernel times larger than the input for a matrix-vector product, so
// accumulate shifted rows directly instead.
constexpr int kDirectMaxOutputs = 4;

template <typename T>
void direct_forward(const Conv1dGeometry& g, int batch, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  const int lout = g.output_length();
  const int pad = g.pad_left();
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < batch; ++n) {
    for (int o = 0; o < g.out_channels; ++o) {
      T* dst = y.data() + (static_cast<std::size_t>(n) * g.out_channels + o) * lout;
      std::fill(dst, dst + lout, b.empty() ? T(0) : b[o]);
      for (int c = 0; c < g.in_channels; ++c) {
        const T* src = x.data() + (static_cast<std::size_t>(n) * g.in_channels + c) * g.input_length;
        const T* wk = w.data() + (static_cast<std::size_t>(o) * g.in_channels + c) * g.kernel;
        for (int k = 0; k < g.kernel; ++k) {
          const auto [lo, hi] = valid_range(g, k);
          const T* s0 = src + k - pad;
          const T wv = wk[k];
          for (int t = lo; t < hi; ++t) dst[t] += wv * s0[t * g.stride];
        }
      }
    }
  }
}

template <typename T>
void direct_backward(const Conv1dGeometry& g, int batch, std::span<const T> x, std::span<const T> w,
                     std::span<const T> gy, std::span<T> gx, std::span<T> gw, std::span<T> gb) {
  const int lout = g.output_length();
  const int pad = g.pad_left();
  if (!gx.empty()) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < batch; ++n) {
      for (int c = 0; c < g.in_channels; ++c) {
        T* dst = gx.data() + (static_cast<std::size_t>(n) * g.in_channels + c) * g.input_length;
        std::fill(dst, dst + g.input_length, T(0));
        for (int o = 0; o < g.out_channels; ++o) {
          const T* go = gy.data() + (static_cast<std::size_t>(n) * g.out_channels + o) * lout;
          const T* wk = w.data() + (static_cast<std::size_t>(o) * g.in_channels + c) * g.kernel;
          for (int k = 0; k < g.kernel; ++k) {
            const auto [lo, hi] = valid_range(g, k);
            T* d0 = dst + k - pad;
            const T wv = wk[k];
            for (int t = lo; t < hi; ++t) d0[t * g.stride] += wv * go[t];
          }
        }
      }
    }
  }
  if (!gw.empty()) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int o = 0; o < g.out_channels; ++o) {
      for (int c = 0; c < g.in_channels; ++c) {
        T* gwk = gw.data() + (static_cast<std::size_t>(o) * g.in_channels + c) * g.kernel;
        for (int k = 0; k < g.kernel; ++k) {
          const auto [lo, hi] = valid_range(g, k);
          T acc = T(0);
          for (int n = 0; n < batch; ++n) {
            const T* go = gy.data() + (static_cast<std::size_t>(n) * g.out_channels + o) * lout;
            const T* s0 = x.data() + (static_cast<std::size_t>(n) * g.in_channels + c) * g.input_length +
                          k - pad;
#pragma omp simd reduction(+ : acc)
            for (int t = lo; t < hi; ++t) acc += go[t] * s0[t * g.stride];
          }
          gwk[k] += acc;
        }
      }
    }
  }
  if (!gb.empty()) {
    for (int o = 0; o < g.out_channels; ++o) {
      T acc = T(0);
      for (int n = 0; n < batch; ++n) {
        const T* go = gy.data() + (static_cast<std::size_t>(n) * g.out_channels + o) * lout;
        for (int t = 0; t < lout; ++t) acc += go[t];
      }
      gb[o] += acc;
    }
  }
}

}  // namespace

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, int batch, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  check_sizes(g, batch, x.size(), w.size(), y.size());
  if (g.out_channels <= kDirectMaxOutputs) return direct_forward(g, batch, x, w, b, y);
  const int lout = g.output_length();
  const Eigen::Map<const RowMat<T>> weights(w.data(), g.out_channels,
                                            static_cast<Eigen::Index>(g.in_channels) * g.kernel);
  const int chunk = chunk_size(g, batch);
  thread_local RowMat<T> col, out;
  for (int first = 0; first < batch; first += chunk) {
    const int count = std::min(chunk, batch - first);
    im2col(g, first, count, x, col);
    out.noalias() = weights * col;
#pragma omp parallel for collapse(2) schedule(static)
    for (int bi = 0; bi < count; ++bi) {
      for (int o = 0; o < g.out_channels; ++o) {
        const T bias = b.empty() ? T(0) : b[o];
        const T* src = out.data() + static_cast<std::size_t>(o) * out.cols() +
                       static_cast<std::size_t>(bi) * lout;
        T* dst = y.data() + (static_cast<std::size_t>(first + bi) * g.out_channels + o) * lout;
        for (int t = 0; t < lout; ++t) dst[t] = src[t] + bias;
      }
    }
  }
}

template <typename T>
void conv1d_backward(const Conv1dGeometry& g, int batch, std::span<const T> x,
                     std::span<const T> w, std::span<const T> gy, std::span<T> gx,
                     std::span<T> gw, std::span<T> gb) {
  check_sizes(g, batch, x.size(), w.size(), gy.size());
  if (g.out_channels <= kDirectMaxOutputs) return direct_backward(g, batch, x, w, gy, gx, gw, gb);
  const int lout = g.output_length();
  const auto rows = static_cast<Eigen::Index>(g.in_channels) * g.kernel;
  const Eigen::Map<const RowMat<T>> weights(w.data(), g.out_channels, rows);
  const int chunk = chunk_size(g, batch);
  thread_local RowMat<T> col, grad_out, grad_col;
  for (int first = 0; first < batch; first += chunk) {
    const int count = std::min(chunk, batch - first);
    grad_out.resize(g.out_channels, static_cast<Eigen::Index>(count) * lout);
#pragma omp parallel for collapse(2) schedule(static)
    for (int bi = 0; bi < count; ++bi) {
      for (int o = 0; o < g.out_channels; ++o) {
        const T* src = gy.data() + (static_cast<std::size_t>(first + bi) * g.out_channels + o) * lout;
        std::copy(src, src + lout,
                  grad_out.data() + static_cast<std::size_t>(o) * grad_out.cols() +
                      static_cast<std::size_t>(bi) * lout);
      }
    }
    if (!gw.empty()) {
      im2col(g, first, count, x, col);
      Eigen::Map<RowMat<T>> grad_w(gw.data(), g.out_channels, rows);
      grad_w.noalias() += grad_out * col.transpose();
    }
    if (!gb.empty()) {
      for (int o = 0; o < g.out_channels; ++o) gb[o] += grad_out.row(o).sum();
    }
    if (!gx.empty()) {
      grad_col.noalias() = weights.transpose() * grad_out;
      col2im(g, first, count, grad_col, gx);
    }
  }
}

namespace reference {

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, int batch, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  check_sizes(g, batch, x.size(), w.size(), y.size());
  const int lout = g.output_length();
  const int pad = g.pad_left();
  for (int n = 0; n < batch; ++n) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int t = 0; t < lout; ++t) {
        double acc = b.empty() ? 0.0 : static_cast<double>(b[o]);
        for (int c = 0; c < g.in_channels; ++c) {
          for (int k = 0; k < g.kernel; ++k) {
            const int pos = t * g.stride + k - pad;
            if (pos < 0 || pos >= g.input_length) continue;
            acc += static_cast<double>(w[(o * g.in_channels + c) * g.kernel + k]) *
                   static_cast<double>(x[(static_cast<std::size_t>(n) * g.in_channels + c) *
                                             g.input_length + pos]);
          }
        }
        y[(static_cast<std::size_t>(n) * g.out_channels + o) * lout + t] = static_cast<T>(acc);
      }
    }
  }
}

template <typename T>
void conv1d_backward(const Conv1dGeometry& g, int batch, std::span<const T> x,
                     std::span<const T> w, std::span<const T> gy, std::span<T> gx,
                     std::span<T> gw, std::span<T> gb) {
  check_sizes(g, batch, x.size(), w.size(), gy.size());
  const int lout = g.output_length();
  const int pad = g.pad_left();
  if (!gx.empty()) std::fill(gx.begin(), gx.end(), T(0));
  for (int n = 0; n < batch; ++n) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int t = 0; t < lout; ++t) {
        const T go = gy[(static_cast<std::size_t>(n) * g.out_channels + o) * lout + t];
        if (!gb.empty()) gb[o] += go;
        for (int c = 0; c < g.in_channels; ++c) {
          for (int k = 0; k < g.kernel; ++k) {
            const int pos = t * g.stride + k - pad;
            if (pos < 0 || pos >= g.input_length) continue;
            const std::size_t xi =
                (static_cast<std::size_t>(n) * g.in_channels + c) * g.input_length + pos;
            const std::size_t wi = (static_cast<std::size_t>(o) * g.in_channels + c) * g.kernel + k;
            if (!gw.empty()) gw[wi] += go * x[xi];
            if (!gx.empty()) gx[xi] += go * w[wi];
          }
        }
      }
    }
  }
}

}  // namespace reference

#define PPG2ECG_INSTANTIATE_CONV(T)                                                             \
  template void conv1d_forward<T>(const Conv1dGeometry&, int, std::span<const T>,               \
                                  std::span<const T>, std::span<const T>, std::span<T>);        \
  template void conv1d_backward<T>(const Conv1dGeometry&, int, std::span<const T>,              \
                                   std::span<const T>, std::span<const T>, std::span<T>,        \
                                   std::span<T>, std::span<T>);                                 \
  template void reference::conv1d_forward<T>(const Conv1dGeometry&, int, std::span<const T>,    \
                                             std::span<const T>, std::span<const T>,            \
                                             std::span<T>);                                     \
  template void reference::conv1d_backward<T>(const Conv1dGeometry&, int, std::span<const T>,   \
                                              std::span<const T>, std::span<const T>,           \
                                              std::span<T>, std::span<T>, std::span<T>);

PPG2ECG_INSTANTIATE_CONV(float)
PPG2ECG_INSTANTIATE_CONV(double)

}  // namespace ppg2ecg::kernels
