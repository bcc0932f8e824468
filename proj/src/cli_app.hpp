#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "euclid/cf_core.hpp"
#include "euclid/enumeration.hpp"

namespace euclid::cli {

// Fully resolved run configuration. Every report embeds its JSON echo so an
// output file is reproducible from its own header.
struct RunConfig {
  std::string command;
  std::string cost_name = "unit";  // "unit", "digit1", inline JSON, or a file path
  CostSpec cost = CostSpec::unit();

  std::uint64_t n = 10000;
  std::vector<std::uint64_t> grid{300, 1000, 3000, 10000, 30000};
  PairKind kind = PairKind::Reduced;
  CostReference reference = CostReference::LogN;
  int p_max = 4;

  int M = 32;
  std::uint64_t n_max = 10000;
  double r = 0.5;

  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::string out;              // empty: write to stdout
  std::string format = "json";  // "json" or "csv"

  // verify options
  std::string which = "depth";  // depth | series | dp
  int depth = 2;
  std::uint64_t digit_bound = 10;
  double s_re = 1.5, s_im = 0.0;
  double omega_re = 0.0, omega_im = 0.0;
  int k_max = 60;
  int p = 1;

  // spectrum options: rows for every (s_re + i*t, omega) in the product grid
  std::vector<double> s_grid;
  std::vector<double> t_grid{0.0};
  std::vector<double> omega_grid{0.0};

  // constants options: Monte-Carlo samples for the variance diagnostic
  // (0 disables it)
  std::uint64_t mc_samples = 0;
  int mc_iter = 1000;
};

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// Parses the "# config ..." header line of a CSV output back into the
// RunConfig that produced it.
RunConfig config_from_csv_header(const std::string& line);

nlohmann::json cost_to_json(const CostSpec& c);
CostSpec cost_from_json(const nlohmann::json& j);

// Resolves --cost values: the names "unit" and "digit1", inline JSON
// ({"table":[...],"tail":t}), or a path to a JSON file.
CostSpec resolve_cost(const std::string& spec);

// Runs the full CLI. Returns the process exit code: 0 success, 1 a check
// failed (gap above bound, missing spectral gap), 2 invalid arguments or
// domain errors, 3 I/O failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace euclid::cli
