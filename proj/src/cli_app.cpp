#include "cli_app.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "euclid/stats.hpp"
#include "euclid/transfer_operator.hpp"
#include "euclid/verify.hpp"

namespace euclid::cli {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json complex_to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

std::complex<double> complex_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

std::complex<double> parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {std::stod(text), 0.0};
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

std::string kind_name(PairKind k) { return k == PairKind::Reduced ? "reduced" : "all"; }

PairKind kind_from_name(const std::string& name) {
  if (name == "reduced") return PairKind::Reduced;
  if (name == "all") return PairKind::All;
  throw std::invalid_argument("unknown pair kind: " + name);
}

std::string reference_name(CostReference r) {
  switch (r) {
    case CostReference::LogV: return "logv";
    case CostReference::LogN: return "logn";
    case CostReference::LogVOverGcd: return "logvgcd";
  }
  return "logn";
}

CostReference reference_from_name(const std::string& name) {
  if (name == "logv") return CostReference::LogV;
  if (name == "logn") return CostReference::LogN;
  if (name == "logvgcd") return CostReference::LogVOverGcd;
  throw std::invalid_argument("unknown cost reference: " + name);
}

DiscParams make_params(const RunConfig& cfg) {
  DiscParams p;
  p.M = cfg.M;
  p.N_max = cfg.n_max;
  p.r = cfg.r;
  return p;
}

// null <-> NaN so that config echoes and reports stay valid JSON
json finite_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

}  // namespace

json cost_to_json(const CostSpec& c) {
  return json{{"table", c.table()}, {"tail", c.tail()}};
}

CostSpec cost_from_json(const json& j) {
  return CostSpec(j.at("table").get<std::vector<double>>(), j.at("tail").get<double>());
}

CostSpec resolve_cost(const std::string& spec) {
  if (spec == "unit") return CostSpec::unit();
  if (spec == "digit1") return CostSpec::digit_indicator(1);
  if (!spec.empty() && spec.front() == '{') return cost_from_json(json::parse(spec));
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("cannot read cost file: " + spec);
  json j;
  in >> j;
  return cost_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["cost"] = cost_to_json(cfg.cost);
  j["cost_name"] = cfg.cost_name;
  j["n"] = cfg.n;
  j["grid"] = cfg.grid;
  j["kind"] = kind_name(cfg.kind);
  j["reference"] = reference_name(cfg.reference);
  j["p_max"] = cfg.p_max;
  j["M"] = cfg.M;
  j["n_max"] = cfg.n_max;
  j["r"] = cfg.r;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["format"] = cfg.format;
  j["which"] = cfg.which;
  j["depth"] = cfg.depth;
  j["digit_bound"] = cfg.digit_bound;
  j["s"] = complex_to_json({cfg.s_re, cfg.s_im});
  j["omega"] = complex_to_json({cfg.omega_re, cfg.omega_im});
  j["k_max"] = cfg.k_max;
  j["p"] = cfg.p;
  j["s_grid"] = cfg.s_grid;
  j["t_grid"] = cfg.t_grid;
  j["omega_grid"] = cfg.omega_grid;
  j["mc_samples"] = cfg.mc_samples;
  j["mc_iter"] = cfg.mc_iter;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  cfg.command = j.value("command", cfg.command);
  if (j.contains("cost")) cfg.cost = cost_from_json(j.at("cost"));
  cfg.cost_name = j.value("cost_name", cfg.cost_name);
  cfg.n = j.value("n", cfg.n);
  cfg.grid = j.value("grid", cfg.grid);
  if (j.contains("kind")) cfg.kind = kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("reference"))
    cfg.reference = reference_from_name(j.at("reference").get<std::string>());
  cfg.p_max = j.value("p_max", cfg.p_max);
  cfg.M = j.value("M", cfg.M);
  cfg.n_max = j.value("n_max", cfg.n_max);
  cfg.r = j.value("r", cfg.r);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out = j.value("out", cfg.out);
  cfg.format = j.value("format", cfg.format);
  cfg.which = j.value("which", cfg.which);
  cfg.depth = j.value("depth", cfg.depth);
  cfg.digit_bound = j.value("digit_bound", cfg.digit_bound);
  if (j.contains("s")) {
    const auto s = complex_from_json(j.at("s"));
    cfg.s_re = s.real();
    cfg.s_im = s.imag();
  }
  if (j.contains("omega")) {
    const auto w = complex_from_json(j.at("omega"));
    cfg.omega_re = w.real();
    cfg.omega_im = w.imag();
  }
  cfg.k_max = j.value("k_max", cfg.k_max);
  cfg.p = j.value("p", cfg.p);
  cfg.s_grid = j.value("s_grid", cfg.s_grid);
  cfg.t_grid = j.value("t_grid", cfg.t_grid);
  cfg.omega_grid = j.value("omega_grid", cfg.omega_grid);
  cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
  cfg.mc_iter = j.value("mc_iter", cfg.mc_iter);
  return cfg;
}

RunConfig config_from_csv_header(const std::string& line) {
  const std::string prefix = "# config ";
  if (line.rfind(prefix, 0) != 0)
    throw std::invalid_argument("not a config header line: " + line);
  return config_from_json(json::parse(line.substr(prefix.size())));
}

namespace {

std::string csv_header_line(const RunConfig& cfg) {
  return "# config " + config_to_json(cfg).dump() + "\n";
}

// Emits the report: stdout in the selected format, or file(s) when --out is
// set. moments always writes both formats to <out>.csv / <out>.json.
int emit(const RunConfig& cfg, const json& report, const std::string& csv, std::ostream& out,
         std::ostream& err) {
  const std::string json_text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << (cfg.format == "csv" ? csv : json_text);
    return 0;
  }
  auto write_file = [&](const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f.good()) {
      err << "error: cannot write " << path << "\n";
      return false;
    }
    return true;
  };
  if (cfg.command == "moments") {
    if (!write_file(cfg.out + ".csv", csv)) return 3;
    if (!write_file(cfg.out + ".json", json_text)) return 3;
    return 0;
  }
  const std::string path =
      cfg.out + (cfg.format == "csv" ? std::string(".csv") : std::string(".json"));
  return write_file(path, cfg.format == "csv" ? csv : json_text) ? 0 : 3;
}

int cmd_constants(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const DiscParams params = make_params(cfg);
  const double mu = mean_constant(cfg.cost);
  const double h = entropy_constant();

  const DerivativeEstimates der = lambda_derivatives(cfg.cost, mu, params);
  const double sigma2 = 2.0 * der.lambda_omegaomega / h;
  const double sigma2_err = 2.0 * der.lambda_omegaomega_err / h;

  const SpectralData sp =
      leading_spectrum(assemble(1.0, 0.0, cfg.cost, mu, params, OperatorVariant::FullL), true);
  DiscParams refined = params;
  refined.M = std::min(refined.M + 8, 64);
  refined.N_max *= 2;
  const SpectralData sp2 = leading_spectrum(
      assemble(1.0, 0.0, cfg.cost, mu, refined, OperatorVariant::FullL), true);

  const double lambda1_gap = std::abs(sp.lambda1 - 1.0);
  const double entropy_gap = std::abs(-der.lambda_s - h);
  const double f0 = f0_constant();
  const double f0_disc = f0_constant_discretized(params);
  const double lambda2_refine = std::abs(sp.lambda2_modulus - sp2.lambda2_modulus);

  json rep;
  rep["config"] = config_to_json(cfg);
  rep["log_convention"] = "natural";
  rep["mu"] = mu;
  rep["entropy"] = h;
  rep["lambda1_at_1_0"] = complex_to_json(sp.lambda1);
  rep["lambda1_gap"] = lambda1_gap;
  rep["lambda_s"] = der.lambda_s;
  rep["lambda_s_err"] = der.lambda_s_err;
  rep["entropy_vs_minus_lambda_s"] = entropy_gap;
  rep["lambda_omega"] = der.lambda_omega;
  rep["lambda_omega_err"] = der.lambda_omega_err;
  rep["sigma2"] = sigma2;
  rep["sigma2_err"] = sigma2_err;
  rep["f0"] = f0;
  rep["f0_discretized"] = f0_disc;
  rep["f0_gap"] = std::abs(f0 - f0_disc);
  rep["lambda2_modulus"] = sp.lambda2_modulus;
  rep["lambda2_refinement_err"] = lambda2_refine;
  rep["gap_ok"] = sp.gap_ok && sp2.gap_ok;
  rep["richardson_warning"] = der.richardson_warning;

  if (cfg.mc_samples > 0) {
    const BirkhoffEstimate mc = variance_birkhoff_estimate(cfg.cost, mu, cfg.mc_iter,
                                                           cfg.mc_samples, cfg.seed, cfg.workers);
    rep["sigma2_birkhoff"] = mc.estimate;
    rep["sigma2_birkhoff_std_error"] = mc.std_error;
  }

  std::ostringstream csv;
  csv << csv_header_line(cfg) << "quantity,value,error\n";
  csv << "mu," << fmt(mu) << ",0\n";
  csv << "entropy," << fmt(h) << ",0\n";
  csv << "lambda1_gap," << fmt(lambda1_gap) << ",0\n";
  csv << "lambda_s," << fmt(der.lambda_s) << "," << fmt(der.lambda_s_err) << "\n";
  csv << "entropy_vs_minus_lambda_s," << fmt(entropy_gap) << ",0\n";
  csv << "lambda_omega," << fmt(der.lambda_omega) << "," << fmt(der.lambda_omega_err) << "\n";
  csv << "sigma2," << fmt(sigma2) << "," << fmt(sigma2_err) << "\n";
  csv << "f0," << fmt(f0) << ",0\n";
  csv << "f0_discretized," << fmt(f0_disc) << "," << fmt(std::abs(f0 - f0_disc)) << "\n";
  csv << "lambda2_modulus," << fmt(sp.lambda2_modulus) << "," << fmt(lambda2_refine) << "\n";
  if (cfg.mc_samples > 0) {
    csv << "sigma2_birkhoff," << fmt(rep["sigma2_birkhoff"].get<double>()) << ","
        << fmt(rep["sigma2_birkhoff_std_error"].get<double>()) << "\n";
  }

  const int rc = emit(cfg, rep, csv.str(), out, err);
  if (rc != 0) return rc;
  if (!sp.gap_ok || !sp2.gap_ok) {
    err << "error: subdominant eigenvalue too close to the leading one\n";
    return 1;
  }
  if (der.richardson_warning) {
    err << "error: derivative estimates disagree between step sizes beyond 1e-5\n";
    return 1;
  }
  if (lambda1_gap > 1e-6) {
    err << "error: leading eigenvalue at (1,0) is off from 1 by " << fmt(lambda1_gap) << "\n";
    return 1;
  }
  return 0;
}

int cmd_moments(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const double mu = mean_constant(cfg.cost);
  const double sigma2 = variance_constant(cfg.cost, make_params(cfg));
  const double sigma = std::sqrt(sigma2);
  const MomentReport rep = moment_report(cfg.grid, cfg.cost, mu, sigma, cfg.p_max, cfg.kind,
                                         cfg.reference, cfg.workers);

  json j;
  j["config"] = config_to_json(cfg);
  j["log_convention"] = rep.log_convention;
  j["mu"] = rep.mu;
  j["sigma"] = rep.sigma;
  j["p_max"] = rep.p_max;
  j["kind"] = kind_name(rep.kind);
  j["reference"] = reference_name(rep.reference);
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json r;
    r["n"] = row.n;
    r["count"] = row.count;
    r["ks"] = row.ks;
    r["m"] = row.m;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);

  std::ostringstream csv;
  csv << csv_header_line(cfg) << "n,count,ks";
  for (int p = 1; p <= rep.p_max; ++p) csv << ",m_" << p;
  csv << "\n";
  for (const auto& row : rep.rows) {
    csv << row.n << "," << row.count << "," << fmt(row.ks);
    for (double m : row.m) csv << "," << fmt(m);
    csv << "\n";
  }
  return emit(cfg, j, csv.str(), out, err);
}

int cmd_verify(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const double mu = mean_constant(cfg.cost);
  const std::complex<double> s{cfg.s_re, cfg.s_im};
  const std::complex<double> omega{cfg.omega_re, cfg.omega_im};
  const DiscParams params = make_params(cfg);

  IdentityReport rep;
  if (cfg.which == "depth") {
    rep = depth_identity(cfg.depth, cfg.digit_bound, s, omega, cfg.cost, mu, params,
                         cfg.workers);
  } else if (cfg.which == "series") {
    rep = series_identity(s, omega, cfg.cost, mu, cfg.n, cfg.k_max, params, cfg.workers);
  } else if (cfg.which == "dp") {
    rep = dp_identity(cfg.p, s, cfg.cost, mu, cfg.n, params, cfg.workers);
  } else {
    throw std::invalid_argument("unknown verify target: " + cfg.which);
  }
  const bool pass = std::isnan(rep.bound) || rep.abs_gap <= rep.bound;

  json j;
  j["config"] = config_to_json(cfg);
  j["which"] = cfg.which;
  j["lhs"] = complex_to_json(rep.lhs);
  j["rhs"] = complex_to_json(rep.rhs);
  j["abs_gap"] = rep.abs_gap;
  j["bound"] = finite_or_null(rep.bound);
  j["pass"] = pass;

  std::ostringstream csv;
  csv << csv_header_line(cfg) << "which,lhs_re,lhs_im,rhs_re,rhs_im,abs_gap,bound,pass\n";
  csv << cfg.which << "," << fmt(rep.lhs.real()) << "," << fmt(rep.lhs.imag()) << ","
      << fmt(rep.rhs.real()) << "," << fmt(rep.rhs.imag()) << "," << fmt(rep.abs_gap) << ","
      << (std::isnan(rep.bound) ? std::string("nan") : fmt(rep.bound)) << ","
      << (pass ? 1 : 0) << "\n";

  const int rc = emit(cfg, j, csv.str(), out, err);
  if (rc != 0) return rc;
  if (!pass) {
    err << "error: identity gap " << fmt(rep.abs_gap) << " exceeds bound " << fmt(rep.bound)
        << " (lhs = " << fmt(rep.lhs.real()) << " + " << fmt(rep.lhs.imag())
        << "i, rhs = " << fmt(rep.rhs.real()) << " + " << fmt(rep.rhs.imag()) << "i)\n";
    return 1;
  }
  return 0;
}

int cmd_spectrum(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const double mu = mean_constant(cfg.cost);
  const DiscParams params = make_params(cfg);

  json rows = json::array();
  std::ostringstream csv;
  csv << csv_header_line(cfg)
      << "s_re,s_im,omega_re,omega_im,lambda1_re,lambda1_im,lambda1_mod,lambda2_mod,gap_ok\n";
  for (double sr : cfg.s_grid) {
    for (double t : cfg.t_grid) {
      for (double w : cfg.omega_grid) {
        const std::complex<double> s{sr, t};
        const SpectralData sp = leading_spectrum(
            assemble(s, w, cfg.cost, mu, params, OperatorVariant::FullL), true);
        json r;
        r["s"] = complex_to_json(s);
        r["omega"] = complex_to_json({w, 0.0});
        r["lambda1"] = complex_to_json(sp.lambda1);
        r["lambda1_mod"] = std::abs(sp.lambda1);
        r["lambda2_mod"] = sp.lambda2_modulus;
        r["gap_ok"] = sp.gap_ok;
        rows.push_back(std::move(r));
        csv << fmt(sr) << "," << fmt(t) << "," << fmt(w) << ",0," << fmt(sp.lambda1.real())
            << "," << fmt(sp.lambda1.imag()) << "," << fmt(std::abs(sp.lambda1)) << ","
            << fmt(sp.lambda2_modulus) << "," << (sp.gap_ok ? 1 : 0) << "\n";
      }
    }
  }
  json j;
  j["config"] = config_to_json(cfg);
  j["rows"] = std::move(rows);
  return emit(cfg, j, csv.str(), out, err);
}

int cmd_census(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const std::uint64_t count = count_omega(cfg.n);
  const double n2 = static_cast<double>(cfg.n) * static_cast<double>(cfg.n);
  const double ratio = static_cast<double>(count) / n2;
  const double target = 3.0 / (3.14159265358979323846 * 3.14159265358979323846);
  const double f0 = f0_constant();
  const double f0_disc = f0_constant_discretized(make_params(cfg));

  json j;
  j["config"] = config_to_json(cfg);
  j["n"] = cfg.n;
  j["count"] = count;
  j["ratio"] = ratio;
  j["target"] = target;
  j["ratio_gap"] = std::abs(ratio - target);
  j["f0"] = f0;
  j["f0_discretized"] = f0_disc;
  j["f0_gap"] = std::abs(f0 - f0_disc);

  std::ostringstream csv;
  csv << csv_header_line(cfg) << "n,count,ratio,target,ratio_gap,f0,f0_discretized,f0_gap\n";
  csv << cfg.n << "," << count << "," << fmt(ratio) << "," << fmt(target) << ","
      << fmt(std::abs(ratio - target)) << "," << fmt(f0) << "," << fmt(f0_disc) << ","
      << fmt(std::abs(f0 - f0_disc)) << "\n";
  return emit(cfg, j, csv.str(), out, err);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Euclidean algorithm cost statistics: constants, moments, identity checks"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string cost_spec = "unit";
  std::string kind_str = "reduced";
  std::string ref_str = "logn";
  std::string s_str = "1.5";
  std::string omega_str = "0";

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--cost", cost_spec, "cost: unit | digit1 | inline JSON | file path");
    sc->add_option("--workers", cfg.workers, "worker thread count");
    sc->add_option("--out", cfg.out, "output path base (default: stdout)");
    sc->add_option("--format", cfg.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sc->add_option("--M", cfg.M, "Taylor basis size");
    sc->add_option("--nmax", cfg.n_max, "digit series truncation for the operator");
    sc->add_option("--seed", cfg.seed, "Monte-Carlo seed");
  };

  auto* c_constants = app.add_subcommand("constants", "growth constants and spectrum summary");
  add_common(c_constants);
  c_constants->add_option("--mc-samples", cfg.mc_samples,
                          "Monte-Carlo samples for the variance diagnostic (0 = off)");
  c_constants->add_option("--mc-iter", cfg.mc_iter, "orbit length per Monte-Carlo sample");

  auto* c_moments = app.add_subcommand("moments", "standardized moments and KS distances");
  add_common(c_moments);
  c_moments->add_option("--grid", cfg.grid, "comma-separated n values")->delimiter(',');
  c_moments->add_option("--kind", kind_str, "reduced | all")
      ->check(CLI::IsMember({"reduced", "all"}));
  c_moments->add_option("--reference", ref_str, "centering reference: logv | logn | logvgcd")
      ->check(CLI::IsMember({"logv", "logn", "logvgcd"}));
  c_moments->add_option("--pmax", cfg.p_max, "highest standardized moment");

  auto* c_verify = app.add_subcommand("verify", "finite truncation identity checks");
  add_common(c_verify);
  c_verify->add_option("--which", cfg.which, "depth | series | dp")
      ->check(CLI::IsMember({"depth", "series", "dp"}));
  c_verify->add_option("--depth", cfg.depth, "operator power for the depth identity");
  c_verify->add_option("--digit-bound", cfg.digit_bound, "digit truncation A");
  c_verify->add_option("--s", s_str, "s as re or re,im");
  c_verify->add_option("--omega", omega_str, "omega as re or re,im");
  c_verify->add_option("--n", cfg.n, "enumeration truncation");
  c_verify->add_option("--kmax", cfg.k_max, "operator power truncation");
  c_verify->add_option("--p", cfg.p, "derivative order for dp");

  auto* c_spectrum = app.add_subcommand("spectrum", "leading eigenvalues over a parameter grid");
  add_common(c_spectrum);
  c_spectrum->add_option("--sgrid", cfg.s_grid, "real parts of s")->delimiter(',');
  c_spectrum->add_option("--tgrid", cfg.t_grid, "imaginary parts of s")->delimiter(',');
  c_spectrum->add_option("--ogrid", cfg.omega_grid, "omega values")->delimiter(',');

  auto* c_census = app.add_subcommand("census", "coprime pair counts and the density constant");
  add_common(c_census);
  c_census->add_option("--n", cfg.n, "count pairs with denominator at most n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    cfg.cost = resolve_cost(cost_spec);
    cfg.cost_name = cost_spec;
    cfg.kind = kind_from_name(kind_str);
    cfg.reference = reference_from_name(ref_str);
    const auto s = parse_complex(s_str);
    cfg.s_re = s.real();
    cfg.s_im = s.imag();
    const auto omega = parse_complex(omega_str);
    cfg.omega_re = omega.real();
    cfg.omega_im = omega.imag();

    if (c_constants->parsed()) {
      cfg.command = "constants";
      return cmd_constants(cfg, out, err);
    }
    if (c_moments->parsed()) {
      cfg.command = "moments";
      return cmd_moments(cfg, out, err);
    }
    if (c_verify->parsed()) {
      cfg.command = "verify";
      return cmd_verify(cfg, out, err);
    }
    if (c_spectrum->parsed()) {
      cfg.command = "spectrum";
      return cmd_spectrum(cfg, out, err);
    }
    if (c_census->parsed()) {
      cfg.command = "census";
      return cmd_census(cfg, out, err);
    }
    err << "error: no subcommand selected\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace euclid::cli
