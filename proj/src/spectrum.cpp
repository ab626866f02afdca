#include "cfb/spectrum.hpp"

#include <cmath>

#include "cfb/errors.hpp"

namespace cfb {

FrequencyGrid::FrequencyGrid(std::vector<double> omega) : omega_(std::move(omega)) {
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    if (!std::isfinite(omega_[i])) throw ParameterError("frequency grid must be finite");
    if (i > 0 && !(omega_[i] > omega_[i - 1])) {
      throw ParameterError("frequency grid must be strictly increasing");
    }
  }
}

FrequencyGrid FrequencyGrid::linspace(double start, double stop, std::size_t points) {
  if (points < 2) throw ParameterError("grid needs at least two points");
  std::vector<double> w(points);
  const double step = (stop - start) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) w[i] = start + step * static_cast<double>(i);
  w.back() = stop;
  return FrequencyGrid(std::move(w));
}

}  // namespace cfb
