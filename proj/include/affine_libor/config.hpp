#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affine_libor/model.hpp"
#include "affine_libor/pricing.hpp"

namespace affine_libor {

/// Flat `section.key = value` settings. Blank lines and `#` comments are ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Tenor file with header `maturity,discount[,delta]`. Without a delta
/// column the maturities must be evenly spaced.
TenorStructure load_tenor_csv(const std::filesystem::path& path);
TenorStructure parse_tenor_csv(const std::string& text);

/// `start:stop:step` or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

struct RunConfig {
  ProcessSpec process = ProcessSpec(CirParams{0.001, 0.5, 0.59, 1.25});
  Vector x0 = Vector::Constant(1, 1.25);
  std::filesystem::path tenor_file;
  CalibrationOptions calibration;
  QuadratureSettings quadrature;
  std::vector<double> strikes;
  std::optional<SurfaceMethod> method;

  int caplet_index = 1;
  double caplet_strike = 0.03;
  int swaption_start = 1;
  int swaption_end = 2;
  double swaption_strike = 0.03;

  std::uint64_t seed = 20020219;
  long mc_paths = 100000;
  unsigned threads = 0;
};

/// Builds a RunConfig; relative file names resolve against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace affine_libor
