#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "medlab/errors.hpp"
#include "medlab/monte_carlo.hpp"
#include "medlab/quadrature.hpp"
#include "medlab/quantum.hpp"
#include "medlab/rng.hpp"
#include "medlab/sweep.hpp"

using namespace medlab;
namespace fs = std::filesystem;

namespace {
SweepConfig small_config() {
  SweepConfig cfg;
  cfg.densities = {"uniform", "sine-0.5"};
  cfg.eps_pows = {4, 6};
  cfg.trials_det = 1;
  cfg.trials_rand = 2;
  cfg.trials_quant = 2;
  cfg.base_seed = 3;
  return cfg;
}
}  // namespace

TEST_CASE("config parsing and validation") {
  std::istringstream in(
      "# small run\n"
      "settings = det, quant\n"
      "criteria=res,abs\n"
      "densities=uniform , sine-0.5\n"
      "r=0\n"
      "rho = 0.5\n"
      "gamma=0.25\n"
      "eps_pows=4,5,6\n"
      "trials_det=2\n"
      "trials_rand=7\n"
      "trials_quant=9\n"
      "base_seed=77\n"
      "threads=2\n"
      "timing=wall  # keep per-record times\n");
  SweepConfig cfg = parse_sweep_config(in);
  REQUIRE(cfg.settings.size() == 2);
  CHECK(cfg.settings[0] == Setting::deterministic);
  CHECK(cfg.settings[1] == Setting::quantum);
  REQUIRE(cfg.criteria.size() == 2);
  CHECK(cfg.criteria[1] == Criterion::absolute);
  CHECK(cfg.densities == std::vector<std::string>{"uniform", "sine-0.5"});
  CHECK(cfg.r == 0);
  CHECK(cfg.rho == 0.5);
  CHECK(!cfg.D.has_value());
  CHECK(cfg.gamma == 0.25);
  CHECK(cfg.eps_pows == std::vector<int>{4, 5, 6});
  CHECK(cfg.trials_det == 2);
  CHECK(cfg.trials_rand == 7);
  CHECK(cfg.trials_quant == 9);
  CHECK(cfg.base_seed == 77);
  CHECK(cfg.threads == 2);
  CHECK(cfg.timing == "wall");

  auto parse = [](const std::string& text) {
    std::istringstream ss(text);
    return parse_sweep_config(ss);
  };
  CHECK_NOTHROW(parse(""));  // defaults are valid
  CHECK_THROWS_WITH_AS(parse("epz_pows=4\n"), doctest::Contains("unknown key 'epz_pows'"),
                       config_error);
  CHECK_THROWS_AS(parse("just a line\n"), config_error);
  CHECK_THROWS_AS(parse("trials_det=abc\n"), config_error);
  CHECK_THROWS_AS(parse("settings=psychic\n"), config_error);
  CHECK_THROWS_AS(parse("densities=nosuch\n"), config_error);
  CHECK_THROWS_AS(parse("eps_pows=0\n"), config_error);
  CHECK_THROWS_AS(parse("eps_pows=41\n"), config_error);
  CHECK_THROWS_AS(parse("trials_rand=0\n"), config_error);
  CHECK_THROWS_AS(parse("threads=-1\n"), config_error);
  CHECK_THROWS_AS(parse("timing=cpu\n"), config_error);
  CHECK_THROWS_AS(parse("rho=1.5\n"), config_error);
  CHECK_THROWS_AS(parse_sweep_config_file("/nonexistent/sweep.cfg"), config_error);
}

TEST_CASE("sweep grid, order and determinism") {
  SweepConfig cfg = small_config();
  std::vector<SweepRecord> recs = run_sweep(cfg);
  // 3 settings x 1 criterion x 2 densities x 2 eps x (1,2,2) trials
  REQUIRE(recs.size() == 2 * 2 * (1 + 2 + 2));

  auto key = [](const SweepRecord& rec) {
    return std::make_tuple(rec.setting, rec.density, rec.eps, rec.seed);
  };
  for (std::size_t i = 1; i < recs.size(); ++i) CHECK(key(recs[i - 1]) < key(recs[i]));

  for (const auto& rec : recs) {
    CHECK(rec.queries > 0);
    CHECK(rec.wall_time == 0.0);
    CHECK(rec.criterion == "residual");
    CHECK(rec.r == 1);
    CHECK(rec.gamma > 0.0);
    if (rec.setting == "deterministic") CHECK(rec.success == 1);
    CHECK(rec.achieved_error_res <= std::max(2.0, rec.D) * rec.eps * 50);
  }

  // thread count must not leak into results
  SweepConfig serial = cfg;
  serial.threads = 1;
  SweepConfig wide = cfg;
  wide.threads = 8;
  CHECK(sweep_csv(run_sweep(serial)) == sweep_csv(run_sweep(wide)));
  CHECK(sweep_csv(run_sweep(cfg)) == sweep_csv(recs));

  // constant overrides land in the records
  SweepConfig over = small_config();
  over.gamma = 0.125;
  over.D = 9.0;
  for (const auto& rec : run_sweep(over)) {
    CHECK(rec.gamma == 0.125);
    CHECK(rec.D == 9.0);
  }

  SweepConfig timed = small_config();
  timed.timing = "wall";
  timed.settings = {Setting::deterministic};
  bool any_positive = false;
  for (const auto& rec : run_sweep(timed)) any_positive = any_positive || rec.wall_time > 0.0;
  CHECK(any_positive);
}

TEST_CASE("csv format and round trip") {
  std::vector<SweepRecord> recs = run_sweep(small_config());
  std::string csv = sweep_csv(recs);
  std::istringstream header(csv);
  std::string first;
  std::getline(header, first);
  CHECK(first ==
        "setting,criterion,density,r,rho,D,H,gamma,eps,seed,queries,"
        "achieved_error_abs,achieved_error_res,success,wall_time");

  std::istringstream in(csv);
  std::vector<SweepRecord> back = read_sweep_csv(in);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].setting == recs[i].setting);
    CHECK(back[i].density == recs[i].density);
    CHECK(back[i].eps == recs[i].eps);
    CHECK(back[i].seed == recs[i].seed);
    CHECK(back[i].queries == recs[i].queries);
    CHECK(back[i].success == recs[i].success);
    CHECK(back[i].achieved_error_res ==
          doctest::Approx(recs[i].achieved_error_res).epsilon(1e-11));
  }
  CHECK(sweep_csv(back) == csv);  // %.12g survives one round trip

  auto read = [](const std::string& text) {
    std::istringstream ss(text);
    return read_sweep_csv(ss);
  };
  CHECK_THROWS_AS(read(""), config_error);
  CHECK_THROWS_AS(read("setting,criterion\n"), config_error);
  std::string line2 = csv.substr(0, csv.find('\n') + 1);
  CHECK_THROWS_AS(read(line2 + "deterministic,residual,uniform\n"), config_error);
  CHECK_THROWS_AS(read(line2 + "deterministic,residual,uniform,x,1,1,1,1,0.1,1,5,0,0,1,0\n"),
                  config_error);
}

TEST_CASE("fit recovers a planted exponent") {
  auto plant = [](Setting s, double expo, double scale) {
    std::vector<SweepRecord> recs;
    for (int p : {4, 6, 8, 10, 12, 14}) {
      double x = p;
      double loglog = std::log2(std::max(x, 2.0));
      double corr = s == Setting::deterministic ? x
                    : s == Setting::randomized  ? x * x * loglog
                                                : x * loglog;
      SweepRecord rec;
      rec.setting = to_string(s);
      rec.eps = std::ldexp(1.0, -p);
      rec.queries = static_cast<std::uint64_t>(std::llround(scale * std::exp2(expo * x) * corr));
      recs.push_back(rec);
    }
    return recs;
  };

  FitResult det = fit_exponent(plant(Setting::deterministic, 0.5, 2000.0),
                               Setting::deterministic, 1, 1.0);
  CHECK(det.exponent_hat == doctest::Approx(0.5).epsilon(0.004));
  CHECK(det.constant_hat == doctest::Approx(2000.0).epsilon(0.05));
  CHECK(det.r_squared > 0.999);
  CHECK(det.theory_exponent == doctest::Approx(0.5));
  CHECK(det.log_correction == "log");
  CHECK(det.points == 6);

  FitResult rnd =
      fit_exponent(plant(Setting::randomized, 0.4, 500.0), Setting::randomized, 1, 1.0);
  CHECK(rnd.exponent_hat == doctest::Approx(0.4).epsilon(0.004));
  CHECK(rnd.theory_exponent == doctest::Approx(1.0 / 2.5));
  CHECK(rnd.log_correction == "log^2*loglog");

  FitResult qnt = fit_exponent(plant(Setting::quantum, 1.0 / 3, 500.0), Setting::quantum, 1, 1.0);
  CHECK(qnt.exponent_hat == doctest::Approx(1.0 / 3).epsilon(0.004));
  CHECK(qnt.theory_exponent == doctest::Approx(1.0 / 3));
  CHECK(qnt.log_correction == "log*loglog");

  // preconditions: five distinct eps, spanning 2^8
  auto planted = plant(Setting::deterministic, 0.5, 2000.0);
  std::vector<SweepRecord> few(planted.begin(), planted.begin() + 4);
  CHECK_THROWS_AS(fit_exponent(few, Setting::deterministic, 1, 1.0), std::domain_error);
  auto narrow = planted;
  for (std::size_t i = 0; i < narrow.size(); ++i)
    narrow[i].eps = std::ldexp(1.0, -4 - static_cast<int>(i));  // pows 4..9, span 5
  CHECK_THROWS_AS(fit_exponent(narrow, Setting::deterministic, 1, 1.0), std::domain_error);
  CHECK_THROWS_AS(fit_exponent(planted, Setting::randomized, 1, 1.0), std::domain_error);
}

TEST_CASE("query cost orders quantum < randomized < deterministic at low smoothness") {
  // oracle-level comparison at fixed failure budget, matching the exponents
  // 1/(r+rho), 1/(r+rho+1/2), 1/(r+rho+1) at r=0, rho=1
  Density d = builtin_catalog("sine-0.5", 0, 1.0);
  double delta = 0.01;
  double truth = d.reference_cdf(0.5);
  std::uint64_t prev_det = 0, prev_mc = 0, prev_q = 0;
  for (int p : {18, 20, 22}) {
    double eps = std::ldexp(1.0, -p);
    Density d1 = d.with_fresh_counter();
    IntegralEstimate det = integrate_det(d1, 0.0, 0.5, det_budget(eps, d.params(), 0.5));
    Density d2 = d.with_fresh_counter();
    auto rng = make_engine(101);
    IntegralEstimate mc = integrate_mc(d2, 0.0, 0.5, eps, delta, rng);
    Density d3 = d.with_fresh_counter();
    QuerySimState st{0, make_engine(202)};
    IntegralEstimate qu = integrate_quantum(d3, 0.0, 0.5, eps, delta, st);

    CHECK(std::abs(det.value - truth) <= eps);
    CHECK(std::abs(mc.value - truth) <= eps);
    CHECK(std::abs(qu.value - truth) <= eps);

    // cost grows as eps shrinks
    CHECK(det.queries > prev_det);
    CHECK(mc.queries > prev_mc);
    CHECK(qu.queries > prev_q);
    prev_det = det.queries;
    prev_mc = mc.queries;
    prev_q = qu.queries;

    if (p == 22) {
      CHECK(qu.queries * 3 < mc.queries);
      CHECK(mc.queries * 3 < det.queries * 2);
      CHECK(qu.queries < mc.queries);
      CHECK(mc.queries < det.queries);
    }
  }
}

TEST_CASE("emit writes csv, fits and plots") {
  SweepConfig cfg = small_config();
  cfg.settings = {Setting::deterministic};
  cfg.eps_pows = {4, 6, 8, 10, 12};
  std::vector<SweepRecord> recs = run_sweep(cfg);
  std::vector<FitResult> fits{fit_exponent(recs, Setting::deterministic, cfg.r, cfg.rho)};

  fs::path dir = fs::temp_directory_path() / "medlab_emit_test";
  fs::remove_all(dir);
  emit_sweep_outputs(recs, fits, dir.string());

  std::ifstream csv(dir / "sweep.csv", std::ios::binary);
  REQUIRE(csv.good());
  std::stringstream csv_bytes;
  csv_bytes << csv.rdbuf();
  CHECK(csv_bytes.str() == sweep_csv(recs));

  std::ifstream jf(dir / "fits.json");
  REQUIRE(jf.good());
  nlohmann::json parsed = nlohmann::json::parse(jf);
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0]["setting"] == "deterministic");
  CHECK(parsed[0]["theory_exponent"] == doctest::Approx(0.5));
  CHECK(parsed[0]["log_correction"] == "log");
  CHECK(parsed[0].contains("exponent_hat"));
  CHECK(parsed[0].contains("constant_hat"));
  CHECK(parsed[0].contains("r_squared"));
  CHECK(parsed[0].contains("points"));

  std::ifstream sf(dir / "plot_deterministic.svg");
  REQUIRE(sf.good());
  std::stringstream svg;
  svg << sf.rdbuf();
  std::string body = svg.str();
  CHECK(body.find("<svg") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = body.find("<polyline"); at != std::string::npos;
       at = body.find("<polyline", at + 1))
    ++polylines;
  CHECK(polylines == 2);  // fitted line plus dashed theory reference
  CHECK(body.find("stroke-dasharray") != std::string::npos);
  CHECK(body.find("<circle") != std::string::npos);
  fs::remove_all(dir);
}
