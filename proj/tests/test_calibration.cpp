#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cfb/calibration.hpp"
#include "cfb/errors.hpp"
#include "cfb/lorentzian_fit.hpp"
#include "cfb/reduced_model.hpp"
#include "fixtures.hpp"

using namespace cfb;
using fixtures::model;

namespace {

HomodyneSetup setup(double d0 = 2.5, double eta1 = 0.91) {
  HomodyneSetup s;
  s.d0 = d0;
  s.eta1 = eta1;
  return s;
}

// Weak readout at a bath temperature giving occupation n.
ModelParams bath(double n) {
  ModelParams m = model(1.0, 0.0, 0.5, 0.0, 0.0);
  m.mech.temperature = kHbar * m.mech.omega_m / (kBoltzmann * std::log1p(1.0 / n));
  return m;
}

std::vector<double> grid_around(double centerHz, double spanHz, int n) {
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = centerHz - spanHz / 2.0 + spanHz * i / (n - 1);
  return f;
}

}  // namespace

TEST_CASE("cavity transduction") {
  const double kappa = hz_to_rad(55e6);
  CHECK(cavity_transduction(kappa, 0.0, 0.0).real() == doctest::Approx(8.0 / kappa).epsilon(1e-15));
  CHECK(std::abs(cavity_transduction(kappa, 0.0, 0.0).imag()) < 1e-20 / kappa);
  for (double d : {0.0, -0.35 * kappa, 0.2 * kappa}) {
    for (double w : {0.1 * kappa, kappa, 3.0 * kappa}) {
      const Complex a = cavity_transduction(kappa, d, w);
      const Complex b = std::conj(cavity_transduction(kappa, d, -w));
      CHECK(std::abs(a - b) < 1e-14 * std::abs(a));
    }
    CHECK(std::abs(cavity_transduction(kappa, d, 1e4 * kappa)) < 1e-3 * 8.0 / kappa);
  }
  // on resonance |R| = 8/kappa / sqrt(1 + (2w/kappa)^2)
  const double w = 0.7 * kappa;
  CHECK(std::abs(cavity_transduction(kappa, 0.0, w)) ==
        doctest::Approx(8.0 / kappa / std::sqrt(1.0 + 4.0 * w * w / (kappa * kappa))));
}

TEST_CASE("occupation from a detector spectrum") {
  const double g0 = hz_to_rad(160.0);

  SUBCASE("round trip through a synthetic spectrum") {
    for (double target : {0.5, 5.0, 100.0, 5e5}) {
      const ModelParams m = bath(target);
      const double truth = phonon_number(m).nBar;
      CHECK(truth == doctest::Approx(target).epsilon(1e-3));
      const double lw = rad_to_hz(m.mech.gamma_m);
      const MeasuredSpectrum s =
          synthesize_psd(setup(), m, g0, grid_around(rad_to_hz(m.mech.omega_m), 400.0 * lw, 40001));
      const CalibrationResult r = phonons_from_psd(setup(), s, g0, m.kappa, m.detuning);
      CHECK(r.valid);
      CHECK(r.tailIntegral > 0.0);
      CHECK(r.nBar == doctest::Approx(truth).epsilon(5e-3));
      CHECK(r.peakFrequencyHz == doctest::Approx(rad_to_hz(m.mech.omega_m)).epsilon(1e-9));
    }
  }
  SUBCASE("tails matter on a narrow grid") {
    const ModelParams m = bath(50.0);
    const double lw = rad_to_hz(m.mech.gamma_m);
    const MeasuredSpectrum s =
        synthesize_psd(setup(), m, g0, grid_around(rad_to_hz(m.mech.omega_m), 20.0 * lw, 4001));
    CalibrationOptions bare;
    bare.tailCorrection = false;
    const double with = phonons_from_psd(setup(), s, g0, m.kappa, 0.0).nBar;
    const double without = phonons_from_psd(setup(), s, g0, m.kappa, 0.0, bare).nBar;
    CHECK(with == doctest::Approx(phonon_number(m).nBar).epsilon(1e-2));
    CHECK(without < 0.98 * with);
  }
  SUBCASE("window around the fitted peak") {
    const ModelParams m = bath(50.0);
    const double lw = rad_to_hz(m.mech.gamma_m);
    const MeasuredSpectrum s =
        synthesize_psd(setup(), m, g0, grid_around(rad_to_hz(m.mech.omega_m), 400.0 * lw, 40001));
    CalibrationOptions opt;
    opt.windowLinewidths = 50.0;
    const CalibrationResult r = phonons_from_psd(setup(), s, g0, m.kappa, 0.0, opt);
    CHECK(r.nBar == doctest::Approx(phonon_number(m).nBar).epsilon(1e-2));
  }
  SUBCASE("an empty spectrum gives minus one half and is flagged") {
    MeasuredSpectrum s;
    s.frequencyHz = {1.0e6, 1.5e6, 2.0e6};
    s.psd = {0.0, 0.0, 0.0};
    const CalibrationResult r = phonons_from_psd(setup(), s, g0, hz_to_rad(55e6), 0.0);
    CHECK(r.nBar == -0.5);
    CHECK_FALSE(r.valid);
    CHECK_FALSE(r.message.empty());
  }
  SUBCASE("doubling D0 quarters n + 1/2") {
    const ModelParams m = bath(20.0);
    const MeasuredSpectrum s =
        synthesize_psd(setup(), m, g0, grid_around(rad_to_hz(m.mech.omega_m), 200.0, 2001));
    const double a = phonons_from_psd(setup(1.0), s, g0, m.kappa, 0.0).nBar;
    const double b = phonons_from_psd(setup(2.0), s, g0, m.kappa, 0.0).nBar;
    CHECK(b + 0.5 == doctest::Approx((a + 0.5) / 4.0).epsilon(1e-12));
  }
  SUBCASE("input validation") {
    MeasuredSpectrum s;
    s.frequencyHz = {1.0, 2.0};
    s.psd = {1.0, 1.0};
    CHECK_THROWS_AS(phonons_from_psd(setup(0.0), s, g0, 1e6, 0.0), ParameterError);
    CHECK_THROWS_AS(phonons_from_psd(setup(1.0, 0.0), s, g0, 1e6, 0.0), ParameterError);
    CHECK_THROWS_AS(phonons_from_psd(setup(), s, 0.0, 1e6, 0.0), ParameterError);
    s.psd = {1.0, -1.0};
    CHECK_THROWS_AS(phonons_from_psd(setup(), s, g0, 1e6, 0.0), ParameterError);
    s.psd = {1.0, 1.0};
    s.frequencyHz = {2.0, 1.0};
    CHECK_THROWS_AS(phonons_from_psd(setup(), s, g0, 1e6, 0.0), ParameterError);
    s.frequencyHz = {-2.0, -1.0};
    CHECK_THROWS_AS(phonons_from_psd(setup(), s, g0, 1e6, 0.0), ParameterError);
  }
}

TEST_CASE("area ratio and reference occupation") {
  CHECK(phonons_from_area_ratio(2.0, 10.0, 1.0) == doctest::Approx(5.0));
  CHECK(phonons_from_area_ratio(2.0, 10.0, 3.0) ==
        doctest::Approx(3.0 * phonons_from_area_ratio(2.0, 10.0, 1.0)));
  CHECK_THROWS_AS(phonons_from_area_ratio(0.0, 10.0, 1.0), ParameterError);
  CHECK_THROWS_AS(phonons_from_area_ratio(-1.0, 10.0, 1.0), ParameterError);

  CHECK(calibration_occupation(1000.0, 2.0, 0.0) == doctest::Approx(1000.0));
  CHECK(calibration_occupation(1000.0, 2.0, 18.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(calibration_occupation(1000.0, 2.0, -3.0), InstabilityError);
}

TEST_CASE("spectrum files") {
  SUBCASE("metadata and mixed delimiters") {
    std::istringstream in(
        "# instrument = ESA\n"
        "# rbw_hz = 1\n"
        "# free comment\n"
        "\n"
        "1.0e6, 2.5\n"
        "1.1e6\t3.5\n"
        "1.2e6 ; 4.5\n");
    const MeasuredSpectrum s = parse_measured_spectrum(in);
    REQUIRE(s.psd.size() == 3);
    CHECK(s.frequencyHz[1] == 1.1e6);
    CHECK(s.psd[2] == 4.5);
    CHECK(s.metadata.at("instrument") == "ESA");
    CHECK(s.metadata.at("rbw_hz") == "1");
    CHECK(s.metadata.size() == 2);
  }
  SUBCASE("malformed rows are rejected") {
    std::istringstream three("1 2 3\n2 3\n");
    CHECK_THROWS_AS(parse_measured_spectrum(three), ParameterError);
    std::istringstream word("1 abc\n2 3\n");
    CHECK_THROWS_AS(parse_measured_spectrum(word), ParameterError);
    std::istringstream unsorted("2 1\n1 1\n");
    CHECK_THROWS_AS(parse_measured_spectrum(unsorted), ParameterError);
    std::istringstream single("1 1\n");
    CHECK_THROWS_AS(parse_measured_spectrum(single), ParameterError);
  }
  SUBCASE("background normalization") {
    MeasuredSpectrum s;
    s.frequencyHz = {1.0, 2.0, 3.0};
    s.psd = {2.0, 4.0, 6.0};
    LorentzianFit fit;
    fit.offset = 2.0;
    const MeasuredSpectrum n = normalize_to_background(s, fit);
    CHECK(n.psd == std::vector<double>{1.0, 2.0, 3.0});
    fit.offset = 0.0;
    CHECK_THROWS_AS(normalize_to_background(s, fit), ParameterError);
  }
}

TEST_CASE("lorentzian fit") {
  LorentzianFit truth;
  truth.offset = 0.3;
  truth.amplitude = 7.0;
  truth.center = 1.9e6;
  truth.halfWidth = 3.5;
  std::vector<double> x = grid_around(truth.center + 1.2, 120.0, 601);
  std::vector<double> y;
  for (double v : x) y.push_back(truth(v));
  const LorentzianFit fit = fit_lorentzian(x, y);
  CHECK(fit.converged);
  CHECK(fit.offset == doctest::Approx(truth.offset).epsilon(1e-6));
  CHECK(fit.amplitude == doctest::Approx(truth.amplitude).epsilon(1e-6));
  CHECK(fit.center == doctest::Approx(truth.center).epsilon(1e-12));
  CHECK(std::abs(fit.halfWidth) == doctest::Approx(truth.halfWidth).epsilon(1e-6));
  CHECK(fit.peak_area() == doctest::Approx(kPi * 7.0 * 3.5).epsilon(1e-6));
  CHECK(fit.residualNorm < 1e-8);
  CHECK_THROWS_AS(fit_lorentzian({1.0, 2.0, 3.0}, {1.0, 2.0, 1.0}), ParameterError);
}
