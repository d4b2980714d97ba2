#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "affine_libor/config.hpp"

namespace affine_libor {

enum class Command { Calibrate, Caplet, Swaption, Surface, Validate };

Command parse_command(const std::string& name);

struct CliOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<SurfaceMethod> method;
};

constexpr int kExitOk = 0;
constexpr int kExitError = 2;
constexpr int kExitValidationFailed = 3;

/// Runs one command. Results go to `out` (or to the --out file), failures
/// are reported on `err` as `error: <Kind>: <message>` with exit status 2.
/// `validate` returns 3 when any check fails.
int run_command(Command cmd, const RunConfig& cfg, const CliOptions& opts, std::ostream& out,
                std::ostream& err);

/// %.12g formatting used by every output file; NaN prints as `nan`.
std::string format_number(double x);

/// u_1..u_N, one line per index, vector components separated by commas.
void write_u_file(std::ostream& os, const CalibratedModel& m);
void write_surface_csv(std::ostream& os, const std::vector<SurfaceCell>& cells);

}  // namespace affine_libor
