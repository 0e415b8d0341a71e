#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "medlab/adversary.hpp"
#include "medlab/errors.hpp"
#include "medlab/holder.hpp"
#include "medlab/median.hpp"
#include "medlab/quantiles.hpp"
#include "medlab/rng.hpp"
#include "medlab/sweep.hpp"

using nlohmann::json;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw medlab::config_error("LAB_SEED must be an unsigned integer");
    }
  }
  return 1;
}

// Accepts "2^-10" style powers as well as plain decimals.
double parse_eps(const std::string& s) {
  double v = 0.0;
  try {
    v = s.rfind("2^", 0) == 0 ? std::ldexp(1.0, std::stoi(s.substr(2))) : std::stod(s);
  } catch (const std::exception&) {
    throw medlab::config_error("bad eps value '" + s + "'");
  }
  if (!(v > 0.0 && v < 1.0)) throw medlab::config_error("eps must lie in (0,1)");
  return v;
}

std::vector<double> parse_alphas(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw medlab::config_error("bad quantile level '" + item + "'");
    }
  }
  if (out.empty()) throw medlab::config_error("alphas must not be empty");
  return out;
}

struct DensityArgs {
  std::string name = "sine-0.5";
  int r = 1;
  double rho = 1.0;
  std::optional<double> D, H, gamma;

  void attach(CLI::App* cmd) {
    cmd->add_option("--density", name, "catalog density name")->capture_default_str();
    cmd->add_option("--r", r, "number of continuous derivatives")->capture_default_str();
    cmd->add_option("--rho", rho, "Hoelder exponent of the r-th derivative")
        ->capture_default_str();
    cmd->add_option("--D", D, "override the derivative bound");
    cmd->add_option("--H", H, "override the Hoelder constant");
    cmd->add_option("--gamma", gamma, "override the lower density bound");
  }

  medlab::Density build() const {
    medlab::Density d = [&] {
      try {
        return medlab::builtin_catalog(name, r, rho);
      } catch (const std::out_of_range& e) {
        throw medlab::config_error(e.what());
      }
    }();
    if (D || H || gamma) {
      medlab::HolderParams p = d.params();
      if (D) p.D = *D;
      if (H) p.H = *H;
      if (gamma) p.gamma = *gamma;
      try {
        d = d.with_params(p);
      } catch (const std::domain_error& e) {
        throw medlab::config_error(e.what());
      }
    }
    return d;
  }
};

json queries_json(const medlab::BisectionTrace& tr) {
  return {{"classical", tr.classical_queries},
          {"quantum", tr.quantum_queries},
          {"total", tr.total_queries}};
}

json trace_json(const medlab::BisectionTrace& tr) {
  json intervals = json::array();
  for (const auto& iv : tr.intervals) intervals.push_back({iv[0], iv[1]});
  return {{"points", tr.points}, {"intervals", intervals}, {"g_values", tr.g_values}};
}

json params_json(const medlab::Density& d) {
  const medlab::HolderParams& p = d.params();
  return {{"r", p.r}, {"rho", p.rho}, {"D", p.D}, {"H", p.H}, {"gamma", p.gamma}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_median(const DensityArgs& da, const std::string& eps_str, const std::string& setting_str,
               const std::string& criterion_str, double target, std::uint64_t seed,
               bool incremental, const std::string& trace_path) {
  medlab::Density d = da.build();
  double eps = parse_eps(eps_str);
  medlab::Setting s = medlab::parse_setting(setting_str);
  medlab::Criterion c = medlab::parse_criterion(criterion_str);
  medlab::BisectOptions opt;
  opt.target = target;
  opt.incremental = incremental;
  medlab::MedianResult m = medlab::median_bisection(d, eps, s, c, seed, opt);

  json out{{"command", "median"},
           {"density", d.name()},
           {"params", params_json(d)},
           {"setting", medlab::to_string(s)},
           {"criterion", medlab::to_string(c)},
           {"eps", eps},
           {"target", target},
           {"seed", seed},
           {"xhat", m.xhat},
           {"iterations", m.trace.iterations},
           {"stop_reason", medlab::to_string(m.trace.stop_reason)},
           {"final_interval", {m.trace.final_interval[0], m.trace.final_interval[1]}},
           {"queries", queries_json(m.trace)}};
  double xstar = d.reference_quantile(target);
  out["reference"] = {{"quantile", xstar},
                      {"error_abs", std::abs(m.xhat - xstar)},
                      {"error_res", std::abs(d.reference_cdf(m.xhat) - target)}};
  if (!trace_path.empty()) {
    json doc = out;
    doc["trace"] = trace_json(m.trace);
    std::ofstream tf(trace_path, std::ios::binary);
    if (!tf) throw std::runtime_error("median: cannot write '" + trace_path + "'");
    tf << doc.dump(2) << "\n";
  }
  emit(out);
  return 0;
}

int run_quantiles(const DensityArgs& da, const std::string& eps_str, const std::string& setting_str,
                  const std::string& criterion_str, const std::string& alphas_str,
                  const std::string& method, std::uint64_t seed) {
  medlab::Density d = da.build();
  double eps = parse_eps(eps_str);
  std::vector<double> alphas = parse_alphas(alphas_str);
  medlab::Setting s = medlab::parse_setting(setting_str);
  medlab::Criterion c = medlab::parse_criterion(criterion_str);

  medlab::QuantileResult q;
  if (method == "bisect") {
    q = medlab::quantiles_bisect(d, alphas, eps, s, c, seed);
  } else if (method == "ivp") {
    if (s != medlab::Setting::deterministic)
      throw medlab::config_error("method 'ivp' is deterministic-only");
    q = medlab::quantiles_ivp_det(d, alphas, eps);
  } else {
    throw medlab::config_error("unknown method '" + method + "' (expected bisect or ivp)");
  }

  json ref_x = json::array(), ref_abs = json::array(), ref_res = json::array();
  for (std::size_t j = 0; j < q.alphas.size(); ++j) {
    double xstar = d.reference_quantile(q.alphas[j]);
    ref_x.push_back(xstar);
    ref_abs.push_back(std::abs(q.xhat[j] - xstar));
    ref_res.push_back(std::abs(d.reference_cdf(q.xhat[j]) - q.alphas[j]));
  }
  emit({{"command", "quantiles"},
        {"density", d.name()},
        {"params", params_json(d)},
        {"setting", medlab::to_string(s)},
        {"criterion", medlab::to_string(c)},
        {"method", method},
        {"eps", eps},
        {"alpha", q.alphas},
        {"seed", seed},
        {"xhat", q.xhat},
        {"monotonicity_violation", q.monotonicity_violation},
        {"queries",
         {{"classical", q.classical_queries},
          {"quantum", q.quantum_queries},
          {"total", q.total_queries}}},
        {"reference", {{"quantiles", ref_x}, {"error_abs", ref_abs}, {"error_res", ref_res}}}});
  return 0;
}

int run_adversary(int r, double rho, const std::string& eps1_str, int trials, std::uint64_t seed,
                  const std::string& probe_setting, const std::string& probe_eps_str,
                  int probe_trials) {
  double eps1 = parse_eps(eps1_str);
  medlab::BumpFamily fam = [&] {
    try {
      return medlab::make_bump_family(r, rho, eps1);
    } catch (const std::domain_error& e) {
      throw medlab::config_error(e.what());
    }
  }();

  auto rng = medlab::make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0, mean = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(fam.n);
    for (auto& v : x) v = unif(rng);
    medlab::Density d = medlab::make_adversarial_density(fam, x);
    double res = medlab::check_median_identity(fam, x, d.reference_quantile(0.5));
    worst = std::max(worst, res);
    mean += res;
  }
  if (trials > 0) mean /= trials;

  json out{{"command", "adversary"},
           {"r", fam.r},
           {"rho", fam.rho},
           {"eps1", fam.eps1},
           {"n", fam.n},
           {"slot", fam.slot},
           {"mass", fam.mass},
           {"amplitude", fam.amplitude},
           {"params",
            {{"r", fam.params.r},
             {"rho", fam.params.rho},
             {"D", fam.params.D},
             {"H", fam.params.H},
             {"gamma", fam.params.gamma}}},
           {"seed", seed},
           {"trials", trials},
           {"identity_residual", {{"max", worst}, {"mean", mean}}}};

  if (!probe_setting.empty()) {
    medlab::Setting s = medlab::parse_setting(probe_setting);
    double eps = parse_eps(probe_eps_str);
    medlab::HardnessProbeReport rep = medlab::hardness_probe(s, r, rho, eps, probe_trials, seed);
    out["probe"] = {{"setting", medlab::to_string(rep.setting)},
                    {"eps", rep.eps},
                    {"eps1", rep.eps1},
                    {"n_bits", rep.n_bits},
                    {"mass", rep.mass},
                    {"trials", rep.trials},
                    {"mean_median_error", rep.mean_median_error},
                    {"mean_recovery_error", rep.mean_recovery_error},
                    {"mean_queries", rep.mean_queries}};
  }
  emit(out);
  return 0;
}

std::vector<medlab::FitResult> fit_all(const std::vector<medlab::SweepRecord>& recs, int r,
                                       double rho, bool* skipped = nullptr) {
  std::vector<medlab::FitResult> fits;
  for (medlab::Setting s : {medlab::Setting::deterministic, medlab::Setting::randomized,
                            medlab::Setting::quantum}) {
    bool present = false;
    for (const auto& rec : recs)
      if (rec.setting == medlab::to_string(s)) {
        present = true;
        break;
      }
    if (!present) continue;
    try {
      fits.push_back(medlab::fit_exponent(recs, s, r, rho));
    } catch (const std::domain_error& e) {
      if (skipped) *skipped = true;
      std::cerr << "note: skipping fit for " << medlab::to_string(s) << ": " << e.what() << "\n";
    }
  }
  return fits;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir) {
  medlab::SweepConfig cfg = medlab::parse_sweep_config_file(config_path);
  std::vector<medlab::SweepRecord> recs = medlab::run_sweep(cfg);
  std::vector<medlab::FitResult> fits = fit_all(recs, cfg.r, cfg.rho);
  medlab::emit_sweep_outputs(recs, fits, out_dir);
  json fits_j = json::array();
  for (const auto& f : fits)
    fits_j.push_back({{"setting", f.setting},
                      {"exponent_hat", f.exponent_hat},
                      {"theory_exponent", f.theory_exponent},
                      {"r_squared", f.r_squared}});
  emit({{"command", "sweep"},
        {"records", recs.size()},
        {"out_dir", out_dir},
        {"fits", fits_j}});
  return 0;
}

int run_fit(const std::string& in_path, const std::string& out_path, int r, double rho) {
  std::ifstream in(in_path);
  if (!in) throw medlab::config_error("fit: cannot open '" + in_path + "'");
  std::vector<medlab::SweepRecord> recs = medlab::read_sweep_csv(in);
  std::vector<medlab::FitResult> fits = fit_all(recs, r, rho);
  if (fits.empty()) throw std::domain_error("fit: no setting had enough eps coverage");
  std::string payload = medlab::fits_json(fits);
  std::cout << payload;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("fit: cannot write '" + out_path + "'");
    out << payload;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query-complexity lab for median and quantile approximation"};
  app.require_subcommand(1);

  DensityArgs med_density;
  std::string med_eps, med_setting = "det", med_criterion = "res", med_trace;
  double med_target = 0.5;
  std::uint64_t med_seed = 0;
  bool med_seed_set = false, med_incremental = false;
  auto* med = app.add_subcommand("median", "approximate one quantile by bisection");
  med_density.attach(med);
  med->add_option("--eps", med_eps, "accuracy, e.g. 2^-10 or 0.001")->required();
  med->add_option("--setting", med_setting, "det | rand | quant")->capture_default_str();
  med->add_option("--criterion", med_criterion, "res | abs")->capture_default_str();
  med->add_option("--target", med_target, "quantile level alpha")->capture_default_str();
  med->add_option("--seed", med_seed, "rng seed (default LAB_SEED or 1)")
      ->each([&](const std::string&) { med_seed_set = true; });
  med->add_flag("--incremental", med_incremental, "reuse the CDF prefix (deterministic only)");
  med->add_option("--trace", med_trace, "write a JSON trace document to this path");

  DensityArgs q_density;
  std::string q_eps, q_setting = "det", q_criterion = "res", q_alphas = "0.25,0.5,0.75",
              q_method = "bisect";
  std::uint64_t q_seed = 0;
  bool q_seed_set = false;
  auto* quant = app.add_subcommand("quantiles", "approximate a vector of quantiles");
  q_density.attach(quant);
  quant->add_option("--eps", q_eps, "accuracy, e.g. 2^-10 or 0.001")->required();
  quant->add_option("--setting", q_setting, "det | rand | quant")->capture_default_str();
  quant->add_option("--criterion", q_criterion, "res | abs")->capture_default_str();
  quant->add_option("--alpha", q_alphas, "comma separated levels")->capture_default_str();
  quant->add_option("--method", q_method, "bisect | ivp")->capture_default_str();
  quant->add_option("--seed", q_seed, "rng seed (default LAB_SEED or 1)")
      ->each([&](const std::string&) { q_seed_set = true; });

  std::string adv_eps1, adv_probe_setting, adv_probe_eps;
  int adv_r = 1, adv_trials = 20, adv_probe_trials = 8;
  double adv_rho = 1.0;
  std::uint64_t adv_seed = 0;
  bool adv_seed_set = false;
  auto* adv = app.add_subcommand("adversary", "build the bump family and check its identities");
  adv->add_option("--eps1", adv_eps1, "family resolution, e.g. 2^-6")->required();
  adv->add_option("--r", adv_r, "number of continuous derivatives")->capture_default_str();
  adv->add_option("--rho", adv_rho, "Hoelder exponent")->capture_default_str();
  adv->add_option("--trials", adv_trials, "random coefficient vectors to test")
      ->capture_default_str();
  adv->add_option("--seed", adv_seed, "rng seed (default LAB_SEED or 1)")
      ->each([&](const std::string&) { adv_seed_set = true; });
  adv->add_option("--probe-setting", adv_probe_setting,
                  "also run the median solver against random members (det | rand | quant)");
  adv->add_option("--probe-eps", adv_probe_eps, "accuracy for the probe solver");
  adv->add_option("--probe-trials", adv_probe_trials, "probe repetitions")->capture_default_str();

  std::string sweep_config, sweep_out = "out";
  auto* sweep = app.add_subcommand("sweep", "run the full benchmark grid");
  sweep->add_option("--config", sweep_config, "key=value config file")->required();
  sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

  std::string fit_in, fit_out;
  int fit_r = 1;
  double fit_rho = 1.0;
  auto* fit = app.add_subcommand("fit", "fit scaling exponents from a sweep csv");
  fit->add_option("--in", fit_in, "sweep.csv produced by the sweep command")->required();
  fit->add_option("--out", fit_out, "optional fits.json destination");
  fit->add_option("--r", fit_r, "smoothness used for the theory exponent")->capture_default_str();
  fit->add_option("--rho", fit_rho, "Hoelder exponent used for the theory exponent")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (med->parsed())
      return run_median(med_density, med_eps, med_setting, med_criterion, med_target,
                        med_seed_set ? med_seed : default_seed(), med_incremental, med_trace);
    if (quant->parsed())
      return run_quantiles(q_density, q_eps, q_setting, q_criterion, q_alphas, q_method,
                           q_seed_set ? q_seed : default_seed());
    if (adv->parsed()) {
      if (!adv_probe_setting.empty() && adv_probe_eps.empty())
        throw medlab::config_error("adversary: --probe-setting needs --probe-eps");
      return run_adversary(adv_r, adv_rho, adv_eps1, adv_trials,
                           adv_seed_set ? adv_seed : default_seed(), adv_probe_setting,
                           adv_probe_eps, adv_probe_trials);
    }
    if (sweep->parsed()) return run_sweep_cmd(sweep_config, sweep_out);
    if (fit->parsed()) return run_fit(fit_in, fit_out, fit_r, fit_rho);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const medlab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const medlab::invariant_error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
