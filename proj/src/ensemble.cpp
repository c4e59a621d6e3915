#include "acscore/ensemble.hpp"

#include <cmath>

namespace acscore {

std::size_t TimeSeries::train_size() const {
  return static_cast<std::size_t>(std::floor(split_fraction * static_cast<double>(values.size())));
}

std::pair<SplitView, SplitView> split(const TimeSeries& series) {
  if (!(series.split_fraction > 0.0 && series.split_fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  }
  const std::size_t boundary = series.train_size();
  if (boundary < 1 || boundary >= series.size()) {
    throw std::invalid_argument("split: series '" + series.id + "' too short for a train/test split");
  }
  return {SplitView(series, SplitRole::train, 0, boundary), SplitView(series, SplitRole::test, boundary, series.size())};
}

}  // namespace acscore
