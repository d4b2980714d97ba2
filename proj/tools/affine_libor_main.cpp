#include <CLI11.hpp>
#include <iostream>

#include "affine_libor/cli.hpp"
#include "affine_libor/errors.hpp"

int main(int argc, char** argv) {
  using namespace affine_libor;
  CLI::App app{"Affine LIBOR model: calibration, pricing, vol surfaces and validation"};
  std::string command;
  std::string config;
  std::string out;
  std::string method;
  std::uint64_t seed = 0;
  app.add_option("command", command, "calibrate | caplet | swaption | surface | validate")->required();
  app.add_option("--config", config, "key = value configuration file")->required();
  app.add_option("--out", out, "write results to this file instead of stdout");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
  app.add_option("--method", method, "fourier | closed");
  CLI11_PARSE(app, argc, argv);

  try {
    CliOptions opts;
    if (!out.empty()) opts.out = out;
    if (*seed_opt) opts.seed = seed;
    if (!method.empty()) opts.method = parse_surface_method(method);
    const Command cmd = parse_command(command);
    const RunConfig cfg = load_config(config);
    return run_command(cmd, cfg, opts, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
