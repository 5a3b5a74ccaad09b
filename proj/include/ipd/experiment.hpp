#pragma once

// Deblurring experiments: problem assembly (blur + noise), ground truth,
// solver runs and their CSV / JSON records. Also image I/O and test images.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipd/solvers.hpp"

namespace ipd {

enum class ProblemKind { tvl1, tvl2, tvl2_smooth };
std::string to_string(ProblemKind p);
ProblemKind problem_from_string(const std::string& s);

struct NoiseSpec {
  enum class Kind { none, saltpepper, gaussian };
  Kind kind = Kind::none;
  double level = 0.0;  ///< fraction of pixels, or standard deviation
  /// "saltpepper:P", "gaussian:S" or "none"
  static NoiseSpec parse(const std::string& s);
  std::string describe() const;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::tvl1;
  Variant algorithm = Variant::reduced;
  double lambda = -1.0;        ///< < 0: problem default
  double gamma_smooth = 1e-3;  ///< only tvl2_smooth
  double alpha = 1.0;
  double q = 0.9;
  double C = 0.0;  ///< > 0 overrides the gap constant
  int n_outer = 2000;
  int max_inner = 5000;
  Mode mode = Mode::practical;
  double blur_fwhm = -1.0;  ///< < 0: 12 * cols / 256
  std::optional<NoiseSpec> noise;  ///< unset: problem default
  std::string image = "synth:shapes";
  std::size_t rows = 64, cols = 64;
  std::uint64_t seed = 1;
  int gt_iters = 20000;
  int polish_iters = 3000;
  std::string output;
  bool unshifted_box_dual = false;
  double beta = 0.0;
  /// fit window for the summary slope; to < 0 means n_outer
  double fit_from = -1.0, fit_to = -1.0;

  double effective_lambda() const;
  double effective_fwhm() const;
  NoiseSpec effective_noise() const;
};

struct GapConstant {
  double value = 1.0;
  std::string provenance;
};

struct BuiltProblem {
  SaddleProblem problem;
  RealGrid clean;
  Shape shape;
};

RealGrid synth_image(const std::string& kind, Shape shape, std::uint64_t seed);
RealGrid add_noise(const RealGrid& u, const NoiseSpec& noise, std::uint64_t seed);

RealGrid read_pgm(const std::string& path);
/// P5, maxval 255, values clamped to [0,1], rounded half up.
void write_pgm(const RealGrid& u, const std::string& path);
RealGrid parse_pgm(const std::string& bytes);
std::string encode_pgm(const RealGrid& u);

BuiltProblem build_problem(const ExperimentConfig& config);

/// lambda |grad v|_1 for the first prox input v (TV); 1 when that vanishes.
GapConstant gap_constant(const SaddleProblem& problem, const StepState& step0, const RealGrid& x0,
                         const RealGrid& y0);

/// Default initial steps of each variant on the nested problem.
StepState default_steps(const SaddleProblem& problem, Variant v, double beta = 0.0);
/// Default steps of the baselines; L_stacked bounds ||(A, grad)||.
StepState baseline_steps(const SaddleProblem& problem, Variant v, double L_stacked);
double stacked_norm_bound(const SaddleProblem& problem);

/// Error schedule for the variant from alpha / q and the constant C.
Schedules make_schedules(Variant v, double alpha, double q, double C);

/// Exact primal-dual on the stacked problem for `iters` iterations, then
/// refined by an exact-limit nested run; keeps the pair of least energy.
SaddleReference compute_ground_truth(const SaddleProblem& problem, int iters, int polish_iters);

struct ExperimentResult {
  RunRecord record;
  SaddleReference reference;
  GapConstant C;
  StepState step0;
  std::string csv;
  std::string json;  ///< summary
  SlopeFit fit;
  bool fit_ok = false;
  bool bound_ok = true;
};

/// Relative objective errors from a record and F*.
std::vector<double> relative_errors(const RunRecord& rec, double F_star, bool ergodic);

/// Full pipeline. A precomputed reference for the same problem can be passed
/// to skip the ground-truth stage.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const SaddleReference* reference = nullptr);

/// Writes result.csv and result.json next to each other (stem of `path`).
void write_outputs(const ExperimentResult& result, const std::string& path);

struct CsvRow {
  int n = 0;
  double tau, sigma, theta, F, relerr, erg_relerr, lag_gap, eps_target, eps_achieved;
  long long inner_it = 0, cum_inner_it = 0;
  double rhs_bound;
};
std::string csv_header();
std::vector<CsvRow> parse_csv(const std::string& text);

struct CertifyReport {
  bool ok = true;
  int rows = 0;
  int bound_violations = 0;
  int order_violations = 0;
  int eps_violations = 0;
  bool descent_ok = true;
  std::vector<std::string> messages;
};
/// Re-checks a stored record: lag_gap <= rhs_bound + 1e-6 scale on every row,
/// cumulative inner counts nondecreasing, descent flag from the summary.
CertifyReport certify_record(const std::string& csv_text, const std::string& json_text);

}  // namespace ipd
