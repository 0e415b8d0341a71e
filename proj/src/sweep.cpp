#include "medlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "medlab/errors.hpp"
#include "medlab/rng.hpp"

namespace medlab {

static std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

static std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

void SweepConfig::validate() const {
  if (settings.empty()) throw config_error("config: settings must not be empty");
  if (criteria.empty()) throw config_error("config: criteria must not be empty");
  if (densities.empty()) throw config_error("config: densities must not be empty");
  if (eps_pows.empty()) throw config_error("config: eps_pows must not be empty");
  for (int p : eps_pows)
    if (p < 1 || p > 40) throw config_error("config: eps_pows entries must be in [1,40]");
  if (trials_det < 1 || trials_rand < 1 || trials_quant < 1)
    throw config_error("config: trial counts must be >= 1");
  if (threads < 0) throw config_error("config: threads must be >= 0");
  if (timing != "none" && timing != "wall")
    throw config_error("config: timing must be 'none' or 'wall'");
  if (r < 0 || r > 10 || !(rho > 0.0 && rho <= 1.0))
    throw config_error("config: need r in [0,10] and rho in (0,1]");
  for (const auto& name : densities) {
    try {
      builtin_catalog(name, r, rho);
    } catch (const std::out_of_range& e) {
      throw config_error(std::string("config: ") + e.what());
    }
  }
}

template <typename T>
static T parse_number(const std::string& v, const std::string& key, T (*conv)(const std::string&)) {
  try {
    return conv(v);
  } catch (const std::exception&) {
    throw config_error("config: bad value '" + v + "' for key '" + key + "'");
  }
}

static int to_int(const std::string& s) { return std::stoi(s); }
static double to_double(const std::string& s) { return std::stod(s); }
static std::uint64_t to_u64(const std::string& s) { return std::stoull(s); }

SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto pos = line.find('=');
    if (pos == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, pos));
    std::string val = trim(line.substr(pos + 1));
    if (key == "settings") {
      cfg.settings.clear();
      for (const auto& tok : split(val, ',')) cfg.settings.push_back(parse_setting(tok));
    } else if (key == "criteria") {
      cfg.criteria.clear();
      for (const auto& tok : split(val, ',')) cfg.criteria.push_back(parse_criterion(tok));
    } else if (key == "densities") {
      cfg.densities = split(val, ',');
    } else if (key == "r") {
      cfg.r = parse_number(val, key, to_int);
    } else if (key == "rho") {
      cfg.rho = parse_number(val, key, to_double);
    } else if (key == "D") {
      cfg.D = parse_number(val, key, to_double);
    } else if (key == "H") {
      cfg.H = parse_number(val, key, to_double);
    } else if (key == "gamma") {
      cfg.gamma = parse_number(val, key, to_double);
    } else if (key == "eps_pows") {
      cfg.eps_pows.clear();
      for (const auto& tok : split(val, ',')) cfg.eps_pows.push_back(parse_number(tok, key, to_int));
    } else if (key == "trials_det") {
      cfg.trials_det = parse_number(val, key, to_int);
    } else if (key == "trials_rand") {
      cfg.trials_rand = parse_number(val, key, to_int);
    } else if (key == "trials_quant") {
      cfg.trials_quant = parse_number(val, key, to_int);
    } else if (key == "base_seed") {
      cfg.base_seed = parse_number(val, key, to_u64);
    } else if (key == "threads") {
      cfg.threads = parse_number(val, key, to_int);
    } else if (key == "timing") {
      cfg.timing = val;
    } else {
      throw config_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SweepConfig parse_sweep_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  return parse_sweep_config(in);
}

struct SweepJob {
  Setting setting;
  Criterion criterion;
  std::size_t density_index;
  double eps;
  std::uint64_t seed;
};

static SweepRecord run_one(const Density& base, Setting s, Criterion c, double eps,
                           std::uint64_t seed, bool wall) {
  Density d = base.with_fresh_counter();
  const HolderParams& p = d.params();
  auto t0 = std::chrono::steady_clock::now();
  MedianResult m = median_bisection(d, eps, s, c, seed);
  double elapsed =
      wall ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;

  SweepRecord rec;
  rec.setting = to_string(s);
  rec.criterion = to_string(c);
  rec.density = d.name();
  rec.r = p.r;
  rec.rho = p.rho;
  rec.D = p.D;
  rec.H = p.H;
  rec.gamma = p.gamma;
  rec.eps = eps;
  rec.seed = seed;
  rec.queries = m.trace.total_queries;
  double xstar = d.reference_quantile(0.5);
  rec.achieved_error_abs = std::abs(m.xhat - xstar);
  rec.achieved_error_res = std::abs(d.reference_cdf(m.xhat) - 0.5);
  double bound = c == Criterion::residual ? std::max(2.0, p.D) * eps
                                          : std::max(1.0, 2.0 / p.gamma) * eps;
  double err = c == Criterion::residual ? rec.achieved_error_res : rec.achieved_error_abs;
  rec.success = err <= bound ? 1 : 0;
  rec.wall_time = elapsed;
  return rec;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<Density> bases;
  for (const auto& name : cfg.densities) {
    Density d = builtin_catalog(name, cfg.r, cfg.rho);
    if (cfg.D || cfg.H || cfg.gamma) {
      HolderParams p = d.params();
      if (cfg.D) p.D = *cfg.D;
      if (cfg.H) p.H = *cfg.H;
      if (cfg.gamma) p.gamma = *cfg.gamma;
      d = d.with_params(p);
    }
    bases.push_back(std::move(d));
  }

  std::vector<SweepJob> jobs;
  std::uint64_t index = 0;
  for (Setting s : cfg.settings) {
    int trials = s == Setting::deterministic ? cfg.trials_det
                 : s == Setting::randomized  ? cfg.trials_rand
                                             : cfg.trials_quant;
    for (Criterion c : cfg.criteria)
      for (std::size_t di = 0; di < bases.size(); ++di)
        for (int pow : cfg.eps_pows)
          for (int t = 0; t < trials; ++t)
            jobs.push_back({s, c, di, std::ldexp(1.0, -pow), mix_seed(cfg.base_seed, index++)});
  }

  std::vector<SweepRecord> records(jobs.size());
  bool wall = cfg.timing == "wall";
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t nthreads = cfg.threads > 0 ? cfg.threads : (hw > 0 ? hw : 1);
  nthreads = std::min(nthreads, jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      const SweepJob& job = jobs[i];
      try {
        records[i] =
            run_one(bases[job.density_index], job.setting, job.criterion, job.eps, job.seed, wall);
      } catch (const std::exception& e) {
        std::scoped_lock lock(err_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error("run_sweep: " + first_error);
  std::stable_sort(records.begin(), records.end(),
                   [](const SweepRecord& a, const SweepRecord& b) {
                     return std::tie(a.setting, a.density, a.eps, a.seed) <
                            std::tie(b.setting, b.density, b.eps, b.seed);
                   });
  return records;
}

static std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

static const char* kCsvHeader =
    "setting,criterion,density,r,rho,D,H,gamma,eps,seed,queries,"
    "achieved_error_abs,achieved_error_res,success,wall_time";

void write_sweep_csv(const std::vector<SweepRecord>& recs, std::ostream& os) {
  os << kCsvHeader << "\n";
  for (const auto& rec : recs) {
    os << rec.setting << ',' << rec.criterion << ',' << rec.density << ',' << rec.r << ','
       << fmt_g(rec.rho) << ',' << fmt_g(rec.D) << ',' << fmt_g(rec.H) << ',' << fmt_g(rec.gamma)
       << ',' << fmt_g(rec.eps) << ',' << rec.seed << ',' << rec.queries << ','
       << fmt_g(rec.achieved_error_abs) << ',' << fmt_g(rec.achieved_error_res) << ','
       << rec.success << ',' << fmt_g(rec.wall_time) << "\n";
  }
}

std::string sweep_csv(const std::vector<SweepRecord>& recs) {
  std::ostringstream ss;
  write_sweep_csv(recs, ss);
  return ss.str();
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw config_error("sweep csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw config_error("sweep csv: unexpected header");
  std::vector<SweepRecord> recs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 15)
      throw config_error("sweep csv line " + std::to_string(lineno) + ": expected 15 fields");
    try {
      SweepRecord rec;
      rec.setting = f[0];
      rec.criterion = f[1];
      rec.density = f[2];
      rec.r = std::stoi(f[3]);
      rec.rho = std::stod(f[4]);
      rec.D = std::stod(f[5]);
      rec.H = std::stod(f[6]);
      rec.gamma = std::stod(f[7]);
      rec.eps = std::stod(f[8]);
      rec.seed = std::stoull(f[9]);
      rec.queries = std::stoull(f[10]);
      rec.achieved_error_abs = std::stod(f[11]);
      rec.achieved_error_res = std::stod(f[12]);
      rec.success = std::stoi(f[13]);
      rec.wall_time = std::stod(f[14]);
      recs.push_back(std::move(rec));
    } catch (const std::exception&) {
      throw config_error("sweep csv line " + std::to_string(lineno) + ": bad field");
    }
  }
  return recs;
}

static double correction(Setting s, double x) {
  double loglog = std::log2(std::max(x, 2.0));
  switch (s) {
    case Setting::deterministic: return x;
    case Setting::randomized: return x * x * loglog;
    case Setting::quantum: return x * loglog;
  }
  return 1.0;
}

static const char* correction_name(Setting s) {
  switch (s) {
    case Setting::deterministic: return "log";
    case Setting::randomized: return "log^2*loglog";
    case Setting::quantum: return "log*loglog";
  }
  return "none";
}

// Mean query count per eps for one setting, keyed by x = log2(1/eps).
static std::map<double, double> query_profile(const std::vector<SweepRecord>& recs, Setting s) {
  std::string name = to_string(s);
  std::map<double, std::pair<double, std::uint64_t>> acc;
  for (const auto& rec : recs) {
    if (rec.setting != name) continue;
    auto& slot = acc[std::log2(1.0 / rec.eps)];
    slot.first += static_cast<double>(rec.queries);
    slot.second += 1;
  }
  std::map<double, double> mean;
  for (const auto& [x, slot] : acc) mean[x] = slot.first / static_cast<double>(slot.second);
  return mean;
}

FitResult fit_exponent(const std::vector<SweepRecord>& recs, Setting s, int r, double rho) {
  auto profile = query_profile(recs, s);
  if (profile.size() < 5)
    throw std::domain_error("fit_exponent: need at least 5 distinct eps values");
  double span = profile.rbegin()->first - profile.begin()->first;
  if (span < 8.0 - 1e-9)
    throw std::domain_error("fit_exponent: eps values must span a factor of 2^8");

  Eigen::Index n = static_cast<Eigen::Index>(profile.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  Eigen::Index i = 0;
  for (const auto& [x, q] : profile) {
    A(i, 0) = 1.0;
    A(i, 1) = x;
    y[i] = std::log2(q / correction(s, x));
    ++i;
  }
  Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
  Eigen::VectorXd resid = y - A * beta;
  double ss_res = resid.squaredNorm();
  double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();

  FitResult fit;
  fit.setting = to_string(s);
  fit.exponent_hat = beta[1];
  fit.constant_hat = std::exp2(beta[0]);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  double smooth = r + rho;
  fit.theory_exponent = s == Setting::deterministic ? 1.0 / smooth
                        : s == Setting::randomized  ? 1.0 / (smooth + 0.5)
                                                    : 1.0 / (smooth + 1.0);
  fit.log_correction = correction_name(s);
  fit.points = static_cast<int>(n);
  return fit;
}

std::string fits_json(const std::vector<FitResult>& fits) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fits) {
    arr.push_back({{"setting", f.setting},
                   {"exponent_hat", f.exponent_hat},
                   {"theory_exponent", f.theory_exponent},
                   {"constant_hat", f.constant_hat},
                   {"r_squared", f.r_squared},
                   {"log_correction", f.log_correction},
                   {"points", f.points}});
  }
  return arr.dump(2) + "\n";
}

static std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

static void write_plot_svg(std::ostream& os, const std::vector<SweepRecord>& recs,
                           const FitResult& fit, Setting s) {
  auto profile = query_profile(recs, s);
  const double W = 640, Hpx = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = profile.begin()->first, xmax = profile.rbegin()->first;
  // theory reference: slope 1/(r+rho[+1/2 or +1]) anchored at the first point
  double cref = std::log2(profile.begin()->second) - fit.theory_exponent * xmin -
                std::log2(correction(s, xmin));
  double ymin = 1e300, ymax = -1e300;
  for (const auto& [x, q] : profile) {
    double y = std::log2(q);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  for (double x : {xmin, xmax}) {
    double y = cref + fit.theory_exponent * x + std::log2(correction(s, x));
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  ymin -= 0.05 * (ymax - ymin);
  ymax += 0.05 * (ymax - ymin);
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return Hpx - mb - (y - ymin) / (ymax - ymin) * (Hpx - mt - mb); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hpx
     << "\" viewBox=\"0 0 " << W << " " << Hpx << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << to_string(s) << " median cost, slope " << fmt_px(fit.exponent_hat) << " (theory "
     << fmt_px(fit.theory_exponent) << ")</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << Hpx - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << Hpx - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << Hpx - mb
     << "\" stroke=\"black\"/>\n";
  for (int x = static_cast<int>(std::ceil(xmin)); x <= static_cast<int>(std::floor(xmax)); ++x) {
    os << "<line x1=\"" << fmt_px(px(x)) << "\" y1=\"" << Hpx - mb << "\" x2=\"" << fmt_px(px(x))
       << "\" y2=\"" << Hpx - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt_px(px(x)) << "\" y=\"" << Hpx - mb + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << x
       << "</text>\n";
  }
  for (int y = static_cast<int>(std::ceil(ymin)); y <= static_cast<int>(std::floor(ymax)); ++y) {
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt_px(py(y)) << "\" x2=\"" << ml << "\" y2=\""
       << fmt_px(py(y)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 9 << "\" y=\"" << fmt_px(py(y) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << y
       << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << Hpx - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log2(1/eps)"
        "</text>\n";
  os << "<text x=\"16\" y=\"" << Hpx / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate("
        "-90 16 "
     << Hpx / 2 << ")\">log2(queries)</text>\n";

  double c0 = std::log2(fit.constant_hat);
  os << "<polyline fill=\"none\" stroke=\"#d95f02\" stroke-width=\"1.5\" points=\"";
  for (int i = 0; i <= 100; ++i) {
    double x = xmin + (xmax - xmin) * i / 100.0;
    double y = c0 + fit.exponent_hat * x + std::log2(correction(s, x));
    os << fmt_px(px(x)) << "," << fmt_px(py(y)) << (i < 100 ? " " : "");
  }
  os << "\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"#555555\" stroke-width=\"1.2\" stroke-dasharray=\"6 4\" "
        "points=\"";
  for (int i = 0; i <= 100; ++i) {
    double x = xmin + (xmax - xmin) * i / 100.0;
    double y = cref + fit.theory_exponent * x + std::log2(correction(s, x));
    os << fmt_px(px(x)) << "," << fmt_px(py(y)) << (i < 100 ? " " : "");
  }
  os << "\"/>\n";
  for (const auto& [x, q] : profile)
    os << "<circle cx=\"" << fmt_px(px(x)) << "\" cy=\"" << fmt_px(py(std::log2(q)))
       << "\" r=\"3.5\" fill=\"#1b6ca8\"/>\n";
  os << "</svg>\n";
}

void emit_sweep_outputs(const std::vector<SweepRecord>& recs, const std::vector<FitResult>& fits,
                        const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(std::filesystem::path(dir) / "sweep.csv", std::ios::binary);
    if (!out) throw std::runtime_error("emit_sweep_outputs: cannot write sweep.csv");
    write_sweep_csv(recs, out);
  }
  {
    std::ofstream out(std::filesystem::path(dir) / "fits.json", std::ios::binary);
    if (!out) throw std::runtime_error("emit_sweep_outputs: cannot write fits.json");
    out << fits_json(fits);
  }
  for (const auto& fit : fits) {
    Setting s = parse_setting(fit.setting);
    std::ofstream out(std::filesystem::path(dir) / ("plot_" + fit.setting + ".svg"),
                      std::ios::binary);
    if (!out) throw std::runtime_error("emit_sweep_outputs: cannot write plot svg");
    write_plot_svg(out, recs, fit, s);
  }
}

}  // namespace medlab
