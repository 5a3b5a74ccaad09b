#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ipd/experiment.hpp"

namespace {

using namespace ipd;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string json_sibling(const std::string& csv_path) {
  if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".csv") {
    return csv_path.substr(0, csv_path.size() - 4) + ".json";
  }
  return csv_path + ".json";
}

std::string csv_path_of(const std::string& record) {
  if (record.size() > 4 && record.substr(record.size() - 4) == ".csv") return record;
  return record + ".csv";
}

const std::map<std::string, Variant> kAlgorithms = {
    {"pdhg", Variant::exact_pdhg},
    {"pdhg-accel", Variant::exact_pdhg_accel},
    {"ipd-basic", Variant::basic},
    {"ipd-reduced", Variant::reduced},
    {"ipd-primal-accel", Variant::primal_accel},
    {"ipd-dual-accel", Variant::dual_accel},
    {"ipd-smooth", Variant::smooth},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact primal-dual solvers for TV deblurring"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "solve one deblurring experiment and write CSV + JSON");
  std::string problem = "tvl1", algorithm = "ipd-reduced", mode = "practical", image = "synth:shapes";
  std::string size = "64x64", noise, out;
  ExperimentConfig cfg;
  double lambda = -1.0, blur = -1.0;
  run->add_option("--problem", problem, "tvl1 | tvl2 | tvl2-smooth")
      ->check(CLI::IsMember({"tvl1", "tvl2", "tvl2-smooth"}));
  run->add_option("--algorithm", algorithm, "pdhg | pdhg-accel | ipd-basic | ipd-reduced | ipd-primal-accel | ipd-dual-accel | ipd-smooth")
      ->check(CLI::IsMember({"pdhg", "pdhg-accel", "ipd-basic", "ipd-reduced", "ipd-primal-accel", "ipd-dual-accel", "ipd-smooth"}));
  run->add_option("--alpha", cfg.alpha, "polynomial error decay parameter")->check(CLI::PositiveNumber);
  run->add_option("--q", cfg.q, "geometric error decay factor in (0,1)")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  run->add_option("--mode", mode, "worst-case | practical")->check(CLI::IsMember({"worst-case", "practical"}));
  run->add_option("--lambda", lambda, "TV weight (default 0.5 for tvl1, 0.01 otherwise)");
  run->add_option("--gamma", cfg.gamma_smooth, "strong convexity of the smooth term (tvl2-smooth)");
  run->add_option("--n-outer", cfg.n_outer, "outer iterations")->check(CLI::PositiveNumber);
  run->add_option("--max-inner", cfg.max_inner, "inner iteration budget per prox")->check(CLI::PositiveNumber);
  run->add_option("--image", image, "PGM path or synth:shapes|synth:ramp|synth:constant");
  run->add_option("--size", size, "RxC for synthetic images");
  run->add_option("--blur-fwhm", blur, "blur FWHM in pixels (default 12*cols/256)");
  run->add_option("--noise", noise, "saltpepper:P | gaussian:S | none");
  run->add_option("--seed", cfg.seed, "random seed");
  run->add_option("--gt-iters", cfg.gt_iters, "ground-truth PDHG iterations")->check(CLI::Range(1000, 100000000));
  run->add_option("--polish-iters", cfg.polish_iters, "nested refinement iterations of the ground truth (0: off)");
  run->add_option("--out", out, "output path (.csv; the summary goes to .json)")->required();
  run->add_flag("--paper-literal", cfg.unshifted_box_dual, "drop the -sigma f shift in the TV-L1 dual update");
  run->add_option("--beta", cfg.beta, "beta of the basic variant step condition")->check(CLI::NonNegativeNumber);
  run->add_option("--C", cfg.C, "override the gap constant (> 0)");
  run->add_option("--fit-from", cfg.fit_from, "start of the slope window");
  run->add_option("--fit-to", cfg.fit_to, "end of the slope window");

  // certify
  auto* certify = app.add_subcommand("certify", "re-check stored bound inequalities; exit 0 iff all hold");
  std::string record;
  certify->add_option("--record", record, "CSV path (JSON summary next to it)")->required();

  // rates
  auto* rates = app.add_subcommand("rates", "fit the convergence slope of a stored record");
  std::string rrecord, metric = "erg_relerr";
  double from = 1.0, to = 1e18;
  bool semilog = false;
  rates->add_option("--record", rrecord, "CSV path")->required();
  rates->add_option("--from", from, "first n");
  rates->add_option("--to", to, "last n");
  rates->add_flag("--semilog", semilog, "fit log(metric) against n");
  rates->add_option("--metric", metric, "erg_relerr | relerr | lag_gap")
      ->check(CLI::IsMember({"erg_relerr", "relerr", "lag_gap"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.problem = problem_from_string(problem);
      cfg.algorithm = kAlgorithms.at(algorithm);
      cfg.mode = mode == "worst-case" ? Mode::worst_case : Mode::practical;
      cfg.lambda = lambda;
      cfg.blur_fwhm = blur;
      cfg.image = image;
      if (!noise.empty()) cfg.noise = NoiseSpec::parse(noise);
      const auto x = size.find('x');
      if (x == std::string::npos) throw Error("--size must be RxC");
      cfg.rows = std::stoul(size.substr(0, x));
      cfg.cols = std::stoul(size.substr(x + 1));
      if (cfg.rows < 1 || cfg.cols < 1) throw Error("--size must be positive");
      cfg.output = out;
      const ExperimentResult res = run_experiment(cfg);
      write_outputs(res, out);
      const RunEntry& last = res.record.entries.back();
      std::printf("F* = %.12g (%s)\n", res.reference.F_star, res.reference.provenance.c_str());
      std::printf("final relerr %.6e, ergodic %.6e, cumulative inner iterations %lld\n",
                  (last.F - res.reference.F_star) / std::abs(res.reference.F_star),
                  (last.F_erg - res.reference.F_star) / std::abs(res.reference.F_star), last.cum_inner_iterations);
      if (res.fit_ok) std::printf("slope %.6f  r2 %.6f\n", res.fit.slope, res.fit.r2);
      std::printf("bound_ok %s\n", res.bound_ok ? "true" : "false");
      return 0;
    }
    if (certify->parsed()) {
      const std::string csv = csv_path_of(record);
      const CertifyReport rep = certify_record(slurp(csv), slurp(json_sibling(csv)));
      for (const std::string& m : rep.messages) std::printf("%s\n", m.c_str());
      std::printf("%d rows, %d bound violations, %d ordering violations, descent %s: %s\n", rep.rows,
                  rep.bound_violations, rep.order_violations, rep.descent_ok ? "ok" : "FAILED",
                  rep.ok ? "CERTIFIED" : "NOT CERTIFIED");
      return rep.ok ? 0 : 1;
    }
    if (rates->parsed()) {
      const std::vector<CsvRow> rows = parse_csv(slurp(csv_path_of(rrecord)));
      std::vector<double> n, v;
      for (const CsvRow& r : rows) {
        n.push_back(r.n);
        v.push_back(metric == "relerr" ? r.relerr : metric == "lag_gap" ? r.lag_gap : r.erg_relerr);
      }
      const SlopeFit fit = fit_loglog_slope(n, v, from, to, semilog);
      if (fit.excluded > 0) std::fprintf(stderr, "warning: %d nonpositive values excluded\n", fit.excluded);
      std::printf("slope %.6f\nr2 %.6f\npoints %d\n", fit.slope, fit.r2, fit.points);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
