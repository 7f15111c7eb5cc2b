#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hypokinetic/verification.hpp"

namespace fs = std::filesystem;
using namespace hypokinetic;

namespace {

enum Exit { ok = 0, verification_failed = 1, invalid_input = 2, runtime_failure = 3 };

std::vector<double> parse_kn_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    double v = detail::parse_real("--kn", item);
    require(v > 0.0 && v <= 1.0, "--kn values must lie in (0, 1]");
    out.push_back(v);
  }
  require(!out.empty(), "--kn needs at least one value");
  return out;
}

Config config_from(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

struct Common {
  std::string config;
  std::string out;
  std::string kn;
  std::string scaling;
};

// Applies --kn (single value) and --scaling overrides to a config.
Config effective_config(const Common& c) {
  Config cfg = config_from(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.scaling.empty()) cfg.scaling = parse_scaling(c.scaling);
  if (!c.kn.empty()) {
    auto kns = parse_kn_list(c.kn);
    require(kns.size() == 1, "--kn takes a single value here (use sweep for lists)");
    cfg.kn = kns.front();
  }
  cfg.validate();
  return cfg;
}

int cmd_rates(std::optional<double> alpha, std::optional<double> beta, std::optional<double> gamma,
              const Common& c) {
  CoercivityConstants k;
  Scaling scaling = c.scaling.empty() ? Scaling::parabolic : parse_scaling(c.scaling);
  std::string default_kn = "1";
  if (alpha || beta || gamma) {
    if (!(alpha && beta && gamma)) throw ValidationError("rates needs all of --alpha, --beta, --gamma");
    k = CoercivityConstants::from(*alpha, *beta, *gamma);
  } else if (!c.config.empty()) {
    Scenario s(load_config(c.config));
    if (c.scaling.empty()) scaling = s.cfg.scaling;
    default_kn = num(s.cfg.kn);
    Certificate cert = certify_scenario(s, s.cfg.z0, 1.0, Scaling::kinetic);
    for (const auto& f : cert.report.failures) std::cerr << "warning: " << f << '\n';
    k = cert.constants;
  } else {
    throw ValidationError("rates needs --alpha, --beta, --gamma or --config");
  }
  std::vector<double> kns = parse_kn_list(c.kn.empty() ? default_kn : c.kn);
  std::string header =
      "kn,scaling,alpha_kn,beta_kn,gamma_kn,a,c,d,eps0,lambda_lower,lambda_parabolic,lambda_highfield,"
      "lambda_numeric,c_eps,branch";
  std::vector<std::string> rows;
  for (double kn : kns) {
    Scaling sc = scaling;
    if (sc == Scaling::kinetic && kn != 1.0) throw ValidationError("kinetic scaling requires Kn = 1");
    ScaledConstants s = rescale(k, kn, sc);
    RatePlan p = certify(s.derived);
    rows.push_back(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", num(kn), to_string(sc),
                               num(s.alpha_kn), num(s.beta_kn), num(s.gamma_kn), num(s.derived.a),
                               num(s.derived.c), num(s.derived.d), num(p.eps0), num(p.lambda_lower),
                               num(p.lambda_parabolic), num(p.lambda_highfield), num(p.lambda_numeric),
                               num(p.c_eps), to_string(p.branch)));
  }
  std::cout << header << '\n';
  for (const auto& r : rows) std::cout << r << '\n';
  if (!c.out.empty()) {
    auto out = open_output(fs::path(c.out) / "rates.csv");
    out << header << '\n';
    for (const auto& r : rows) out << r << '\n';
  }
  return ok;
}

int cmd_simulate(const Common& c) {
  Config cfg = effective_config(c);
  Scenario s(cfg);
  SimulationResult r = run_simulation(s, cfg.kn, cfg.scaling);
  fs::path dir(cfg.out_dir);
  write_norms_csv(dir / "norms.csv", r.traj);
  auto out = open_output(dir / "summary.csv");
  out << summary_header() << '\n' << summary_row(r) << '\n';
  std::cout << fmt::format("Kn={} {}: lambda_lower={:.6g} fitted_rate={:.6g} C(eps0)={:.6g} bound violations={}\n",
                           r.kn, to_string(r.scaling), r.cert.plan.lambda_lower, r.fitted_rate, r.cert.plan.c_eps,
                           r.bound_violations);
  std::cout << "wrote " << (dir / "norms.csv").string() << " and " << (dir / "summary.csv").string() << '\n';
  return ok;
}

int cmd_hierarchy(const Common& c, std::optional<int> lmax) {
  Config cfg = effective_config(c);
  if (lmax) {
    require(*lmax >= 0 && *lmax <= max_hierarchy_order, "--lmax must lie in [0, 10]");
    cfg.lmax = *lmax;
  }
  Scenario s(cfg);
  HierarchyResult r = run_hierarchy(s, cfg.lmax, cfg.kn, cfg.scaling);
  fs::path dir(cfg.out_dir);
  write_hierarchy_csv(dir / "hierarchy.csv", r);
  write_radius_csv(dir / "radius.csv", r);
  std::cout << fmt::format("sigma={} Kn={} {} lmax={}: lambda_z={:.6g} eps_z={:.6g} C1~={:.6g} C2~={:.6g}\n",
                           cfg.sigma_kind == SigmaKind::affine ? "affine" : "analytic", cfg.kn,
                           to_string(cfg.scaling), cfg.lmax, r.constants.lambda_z, r.constants.eps_z,
                           r.constants.c1_tilde(), r.constants.c2_tilde());
  std::cout << "bound violations: " << r.violations << '\n';
  return r.violations == 0 ? ok : verification_failed;
}

int cmd_verify(const Common& c) {
  Config cfg = effective_config(c);
  Scenario s(cfg);
  std::vector<CriterionResult> results;
  auto report = [&](const CriterionResult& r) {
    std::cout << format_line(r) << std::endl;
    results.push_back(r);
  };

  report(criterion_assumptions({{"scenario", s}}));
  bool assumptions_ok = results.back().passed;
  report(criterion_rate_domination());
  std::vector<CoercivityConstants> measured;
  if (assumptions_ok) measured.push_back(certify_scenario(s, cfg.z0, 1.0, Scaling::kinetic).constants);
  report(criterion_kn_uniformity({CoercivityConstants::from(1, 1, 1)}, false, measured));
  report(criterion_cascades());
  if (assumptions_ok) {
    RunLedger ledger;
    report(criterion_decay(s, ledger));
    report(criterion_entropy(s, ledger));
    report(criterion_mass(ledger));
    std::vector<HierarchyResult> hier;
    report(criterion_derivative_bounds({{"scenario", s, cfg.kn, cfg.scaling}}, cfg.lmax, hier));
    report(criterion_radius(hier));
    report(criterion_collocation(s));
  } else {
    std::cout << "scenario-dependent criteria skipped: operator assumptions do not hold\n";
  }
  bool all = assumptions_ok;
  for (const auto& r : results) all = all && r.passed;
  std::cout << (all ? "verify: all criteria passed\n" : "verify: FAILED\n");
  return all ? ok : verification_failed;
}

int cmd_sweep(const Common& c) {
  Config cfg = config_from(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  std::vector<Scaling> scalings;
  if (c.scaling == "both")
    scalings = {Scaling::parabolic, Scaling::highfield};
  else
    scalings = {c.scaling.empty() ? cfg.scaling : parse_scaling(c.scaling)};
  std::vector<double> kns = c.kn.empty() ? std::vector<double>{cfg.kn} : parse_kn_list(c.kn);

  struct Job {
    double kn;
    Scaling scaling;
    fs::path dir;
    std::string row;
    std::string error;
    int code = ok;
  };
  std::vector<Job> jobs;
  for (Scaling sc : scalings)
    for (double kn : kns) {
      if (sc == Scaling::kinetic && kn != 1.0) throw ValidationError("kinetic scaling requires Kn = 1");
      jobs.push_back({kn, sc, fs::path(cfg.out_dir) / fmt::format("{}_kn{}", to_string(sc), kn), "", "", ok});
    }
  cfg.validate();
  Scenario base(cfg);

  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HYPOKINETIC_THREADS")) {
    long n = detail::parse_int("HYPOKINETIC_THREADS", env);
    require(n >= 1, "HYPOKINETIC_THREADS must be >= 1");
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));

  std::mutex m;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t j;
      {
        std::lock_guard<std::mutex> lock(m);
        if (next >= jobs.size()) return;
        j = next++;
      }
      Job& job = jobs[j];
      try {
        SimulationResult r = run_simulation(base, job.kn, job.scaling);
        write_norms_csv(job.dir / "norms.csv", r.traj);
        job.row = summary_row(r);
      } catch (const ValidationError& e) {
        job.error = e.what();
        job.code = invalid_input;
      } catch (const std::exception& e) {
        job.error = e.what();
        job.code = runtime_failure;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = ok;
  auto out = open_output(fs::path(cfg.out_dir) / "summary.csv");
  out << summary_header() << '\n';
  for (const Job& job : jobs) {
    if (job.code != ok) {
      std::cerr << fmt::format("Kn={} {}: {}\n", job.kn, to_string(job.scaling), job.error);
      code = std::max(code, job.code);
      continue;
    }
    out << job.row << '\n';
    std::cout << job.row << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypocoercive decay rates and random-input derivative bounds for linear kinetic equations"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool kn_list) {
    sub->add_option("--config", common.config, "scenario file (INI-style key = value with [sections])");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--kn", common.kn, kn_list ? "comma-separated Knudsen numbers" : "Knudsen number");
    sub->add_option("--scaling", common.scaling, "kinetic, parabolic or highfield");
  };

  std::optional<double> alpha, beta, gamma;
  std::optional<int> lmax;
  auto* rates = app.add_subcommand("rates", "decay-rate certificates for given or measured constants");
  rates->add_option("--alpha", alpha, "microscopic coercivity constant");
  rates->add_option("--beta", beta, "macroscopic coercivity constant");
  rates->add_option("--gamma", gamma, "auxiliary-operator bound");
  add_common(rates, true);
  auto* simulate = app.add_subcommand("simulate", "integrate one scenario, write norms.csv and summary.csv");
  add_common(simulate, false);
  auto* hierarchy = app.add_subcommand("hierarchy", "solve the z-derivative hierarchy, write hierarchy.csv and radius.csv");
  add_common(hierarchy, false);
  hierarchy->add_option("--lmax", lmax, "highest derivative order (<= 10)");
  auto* verify = app.add_subcommand("verify", "check every bound on a scenario; exit 1 on any failure");
  add_common(verify, false);
  auto* sweep = app.add_subcommand("sweep", "simulate a list of Kn values in parallel");
  add_common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return invalid_input;
  }

  try {
    if (*rates) return cmd_rates(alpha, beta, gamma, common);
    if (*simulate) return cmd_simulate(common);
    if (*hierarchy) return cmd_hierarchy(common, lmax);
    if (*verify) return cmd_verify(common);
    if (*sweep) return cmd_sweep(common);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return invalid_input;
  } catch (const StabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime_failure;
  }
  return invalid_input;
}
