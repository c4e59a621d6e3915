#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace acscore {

struct TimeSeries {
  std::string id;
  std::vector<double> values;
  double split_fraction = 0.6;

  std::size_t size() const { return values.size(); }
  /// floor(split_fraction * T)
  std::size_t train_size() const;
};

enum class SplitRole { train, test };

/// Non-owning view of one side of a train/test split. Indices are series
/// indices; `begin()` of the test view equals `end()` of the train view.
class SplitView {
 public:
  SplitView(const TimeSeries& series, SplitRole role, std::size_t begin, std::size_t end)
      : series_(&series), role_(role), begin_(begin), end_(end) {}

  const TimeSeries& series() const { return *series_; }
  SplitRole role() const { return role_; }
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }
  std::size_t size() const { return end_ - begin_; }
  std::span<const double> values() const {
    return std::span<const double>(series_->values).subspan(begin_, end_ - begin_);
  }

 private:
  const TimeSeries* series_;
  SplitRole role_;
  std::size_t begin_;
  std::size_t end_;
};

/// Throws std::invalid_argument when either side would be empty or the
/// fraction is outside (0, 1).
std::pair<SplitView, SplitView> split(const TimeSeries& series);

/// Strided k x w view of forecast samples: element (i, j) is sample i at the
/// j-th column of the block.
template <class T>
struct SampleBlock {
  const T* base = nullptr;
  std::size_t samples = 0;
  std::size_t width = 0;
  std::size_t sample_stride = 1;
  std::size_t step_stride = 1;

  const T& operator()(std::size_t i, std::size_t j) const { return base[i * sample_stride + j * step_stride]; }

  static SampleBlock row_major(std::span<const T> data, std::size_t k, std::size_t w) {
    if (data.size() != k * w) throw std::invalid_argument("sample block: data size does not match k x w");
    return {data.data(), k, w, w, 1};
  }
};

/// Forecast samples indexed [origin][step][sample]. `step` is 0-based, so step
/// s holds the horizon s + 1 forecast. Origin o was issued after observing
/// series index origin_offset + o, and its step-s cell targets series index
/// origin_offset + o + s + 1.
template <class T>
class BasicEnsemble {
 public:
  BasicEnsemble() = default;
  BasicEnsemble(std::size_t origins, std::size_t horizon, std::size_t samples, std::size_t origin_offset,
                T fill = T{})
      : n_(origins), m_(horizon), k_(samples), offset_(origin_offset), cells_(origins * horizon * samples, fill) {
    if (origins == 0 || horizon == 0 || samples == 0) {
      throw std::invalid_argument("ensemble: origins, horizon and samples must be positive");
    }
  }

  std::size_t origins() const { return n_; }
  std::size_t horizon() const { return m_; }
  std::size_t samples() const { return k_; }
  std::size_t origin_offset() const { return offset_; }

  T& at(std::size_t origin, std::size_t step, std::size_t sample) { return cells_[index(origin, step, sample)]; }
  const T& at(std::size_t origin, std::size_t step, std::size_t sample) const {
    return cells_[index(origin, step, sample)];
  }

  std::size_t origin_time(std::size_t origin) const { return offset_ + origin; }
  std::size_t target_index(std::size_t origin, std::size_t step) const { return offset_ + origin + step + 1; }
  /// One past the last series index any cell targets.
  std::size_t target_end() const { return offset_ + n_ + m_; }

  /// All k paths of one origin restricted to steps [first_step, first_step + width).
  SampleBlock<T> block(std::size_t origin, std::size_t first_step, std::size_t width) const {
    return {&cells_[index(origin, first_step, 0)], k_, width, 1, k_};
  }

  /// Forecasts of `target` (a series index) from every covering origin,
  /// ordered by ascending origin. Throws when no origin covers it.
  std::vector<T> anti_diagonal(std::size_t target, std::size_t sample) const {
    if (sample >= k_) throw std::out_of_range("ensemble: sample index out of range");
    std::vector<T> out;
    for (std::size_t o = 0; o < n_; ++o) {
      const std::size_t t = offset_ + o;
      if (t < target && target - t <= m_) out.push_back(at(o, target - t - 1, sample));
    }
    if (out.empty()) throw std::out_of_range("ensemble: target outside ensemble coverage");
    return out;
  }

  std::span<const T> cells() const { return cells_; }

 private:
  std::size_t index(std::size_t o, std::size_t s, std::size_t i) const { return (o * m_ + s) * k_ + i; }

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::size_t offset_ = 0;
  std::vector<T> cells_;
};

using ForecastEnsemble = BasicEnsemble<double>;

}  // namespace acscore
