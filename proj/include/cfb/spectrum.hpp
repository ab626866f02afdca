#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cfb {

/// Strictly increasing angular-frequency grid (rad/s).
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<double> omega);

  static FrequencyGrid linspace(double start, double stop, std::size_t points);

  const std::vector<double>& omega() const { return omega_; }
  std::size_t size() const { return omega_.size(); }
  double operator[](std::size_t i) const { return omega_[i]; }

 private:
  std::vector<double> omega_;
};

/// Sampled real spectral density with a description of what it is.
struct Spectrum {
  std::vector<double> omega;
  std::vector<double> values;
  std::string observable;
  std::string model;
};

}  // namespace cfb
