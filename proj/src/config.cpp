#include "affine_libor/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "affine_libor/errors.hpp"

namespace affine_libor {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError, where + ": '" + s + "' is not a number");
  }
  return v;
}

long parse_long(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError, where + ": '" + s + "' is not an integer");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  for (int row = 1; std::getline(in, line); ++row) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(row) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(row) + ": empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(row) + ": duplicate key " + key);
    }
  }
  return out;
}

TenorStructure parse_tenor_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) header = split(trim(line), ',');
  }
  if (header.empty()) throw Error(ErrorKind::ParseError, "tenor file is empty");
  const bool with_delta = header.size() == 3 && header[2] == "delta";
  if (header.size() < 2 || header[0] != "maturity" || header[1] != "discount" ||
      (header.size() == 3 && !with_delta) || header.size() > 3) {
    throw Error(ErrorKind::ParseError, "row " + std::to_string(row) +
                                           ": header must be maturity,discount[,delta]");
  }
  std::vector<double> T, B, D;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    const std::string where = "row " + std::to_string(row);
    if (cells.size() != header.size()) throw Error(ErrorKind::ParseError, where + ": wrong number of fields");
    const double t = parse_double(cells[0], where);
    const double b = parse_double(cells[1], where);
    if (!(t > (T.empty() ? 0.0 : T.back()))) {
      throw Error(ErrorKind::ParseError, where + ": maturities must increase from 0");
    }
    if (!(b > 0.0 && b <= 1.0)) throw Error(ErrorKind::ParseError, where + ": discount outside (0, 1]");
    if (!B.empty() && b > B.back()) {
      throw Error(ErrorKind::MonotonicityError,
                  where + ": discount rises, implying a negative initial LIBOR rate");
    }
    T.push_back(t);
    B.push_back(b);
    if (with_delta) {
      const double d = parse_double(cells[2], where);
      if (!(d > 0.0)) throw Error(ErrorKind::ParseError, where + ": delta must be positive");
      D.push_back(d);
    }
  }
  if (T.empty()) throw Error(ErrorKind::ParseError, "tenor file has no data rows");
  if (!with_delta) {
    const double delta = T[0];
    for (std::size_t k = 1; k < T.size(); ++k) {
      if (std::abs((T[k] - T[k - 1]) - delta) > 1e-9 * std::max(1.0, T[k])) {
        throw Error(ErrorKind::ParseError,
                    "maturities are not evenly spaced; add a delta column");
      }
    }
    return TenorStructure(T, B, std::vector<double>(T.size(), delta));
  }
  return TenorStructure(T, B, D);
}

TenorStructure load_tenor_csv(const std::filesystem::path& path) {
  return parse_tenor_csv(read_file(path));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const std::string s = trim(text);
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw Error(ErrorKind::ParseError, "grid must be start:stop:step");
    const double a = parse_double(parts[0], "grid start");
    const double b = parse_double(parts[1], "grid stop");
    const double h = parse_double(parts[2], "grid step");
    if (!(h > 0.0) || b < a) throw Error(ErrorKind::ParseError, "grid needs step > 0 and stop >= start");
    const long n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    for (const auto& cell : split(s, ',')) out.push_back(parse_double(cell, "grid"));
  }
  if (out.empty()) throw Error(ErrorKind::ParseError, "empty grid");
  return out;
}

namespace {

class Settings {
 public:
  explicit Settings(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  std::string str(const std::string& key) {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw Error(ErrorKind::ParseError, "missing setting " + key);
    return it->second;
  }
  double num(const std::string& key) { return parse_double(str(key), key); }
  double num(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }
  long integer(const std::string& key, long fallback) {
    return has(key) ? parse_long(str(key), key) : fallback;
  }
  void reject_unused() const {
    for (const auto& [k, v] : kv_) {
      if (!used_.count(k)) throw Error(ErrorKind::ParseError, "unknown setting " + k);
    }
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

ProcessSpec cir_from(Settings& s, const std::string& prefix) {
  return ProcessSpec(CirParams{s.num(prefix + "lambda"), s.num(prefix + "theta"), s.num(prefix + "eta"),
                               s.num(prefix + "x0")});
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  Settings s(parse_key_values(text));
  RunConfig cfg;
  const std::string family = s.str("process.family");
  if (family == "cir") {
    cfg.process = cir_from(s, "process.");
  } else if (family == "gamma_ou") {
    cfg.process = ProcessSpec(GammaOuParams{s.num("process.lambda"), s.num("process.alpha"),
                                            s.num("process.beta"), s.num("process.x0")});
  } else if (family == "cir_product") {
    const long n = s.integer("process.factors", 2);
    if (n < 1) throw Error(ErrorKind::ParseError, "process.factors must be positive");
    ProductProcess prod;
    for (long j = 1; j <= n; ++j) prod.factors.push_back(cir_from(s, "factor" + std::to_string(j) + "."));
    cfg.process = ProcessSpec(std::move(prod));
  } else {
    throw Error(ErrorKind::ParseError, "unknown process.family '" + family + "' (cir|gamma_ou|cir_product)");
  }
  cfg.x0 = cfg.process.initial_state();

  cfg.tenor_file = s.str("tenor.file");
  if (cfg.tenor_file.is_relative() && !base_dir.empty()) cfg.tenor_file = base_dir / cfg.tenor_file;

  cfg.calibration.tol = s.num("calibration.tol", cfg.calibration.tol);
  cfg.calibration.max_iterations =
      static_cast<int>(s.integer("calibration.max_iterations", cfg.calibration.max_iterations));

  if (s.has("quadrature.damping")) cfg.quadrature.damping = s.num("quadrature.damping");
  cfg.quadrature.rel_tol = s.num("quadrature.rel_tol", cfg.quadrature.rel_tol);
  cfg.quadrature.abs_tol = s.num("quadrature.abs_tol", cfg.quadrature.abs_tol);
  cfg.quadrature.truncation = s.num("quadrature.truncation", cfg.quadrature.truncation);

  if (s.has("surface.strikes")) cfg.strikes = parse_grid(s.str("surface.strikes"));
  if (s.has("surface.method")) cfg.method = parse_surface_method(s.str("surface.method"));

  cfg.caplet_index = static_cast<int>(s.integer("caplet.index", cfg.caplet_index));
  cfg.caplet_strike = s.num("caplet.strike", cfg.caplet_strike);
  cfg.swaption_start = static_cast<int>(s.integer("swaption.start", cfg.swaption_start));
  cfg.swaption_end = static_cast<int>(s.integer("swaption.end", cfg.swaption_end));
  cfg.swaption_strike = s.num("swaption.strike", cfg.swaption_strike);

  const long seed = s.integer("mc.seed", static_cast<long>(cfg.seed));
  if (seed < 0) throw Error(ErrorKind::ParseError, "mc.seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.mc_paths = s.integer("mc.paths", cfg.mc_paths);
  if (cfg.mc_paths < 2) throw Error(ErrorKind::ParseError, "mc.paths must be at least 2");
  const long threads = s.integer("run.threads", 0);
  if (threads < 0) throw Error(ErrorKind::ParseError, "run.threads must be non-negative");
  cfg.threads = static_cast<unsigned>(threads);

  s.reject_unused();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

}  // namespace affine_libor
