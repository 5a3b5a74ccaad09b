#include "ipd/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace ipd {

using nlohmann::json;

std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::tvl1: return "tvl1";
    case ProblemKind::tvl2: return "tvl2";
    case ProblemKind::tvl2_smooth: return "tvl2-smooth";
  }
  return "unknown";
}

ProblemKind problem_from_string(const std::string& s) {
  if (s == "tvl1") return ProblemKind::tvl1;
  if (s == "tvl2") return ProblemKind::tvl2;
  if (s == "tvl2-smooth" || s == "tvl2_smooth") return ProblemKind::tvl2_smooth;
  throw Error("unknown problem '" + s + "'");
}

namespace {

double parse_real(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error("cannot parse " + what + " '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) throw Error("cannot parse " + what + " '" + s + "'");
  return v;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

NoiseSpec NoiseSpec::parse(const std::string& s) {
  NoiseSpec n;
  if (s == "none") return n;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw Error("noise must be saltpepper:P, gaussian:S or none");
  const std::string kind = s.substr(0, colon);
  n.level = parse_real(s.substr(colon + 1), "noise level");
  if (kind == "saltpepper") {
    n.kind = Kind::saltpepper;
    if (n.level < 0.0 || n.level > 1.0) throw Error("salt-and-pepper fraction must lie in [0,1]");
  } else if (kind == "gaussian") {
    n.kind = Kind::gaussian;
    if (n.level < 0.0) throw Error("gaussian noise level must be nonnegative");
  } else {
    throw Error("unknown noise kind '" + kind + "'");
  }
  return n;
}

std::string NoiseSpec::describe() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::saltpepper: return "saltpepper:" + fmt17(level);
    case Kind::gaussian: return "gaussian:" + fmt17(level);
  }
  return "none";
}

double ExperimentConfig::effective_lambda() const {
  if (lambda >= 0.0) return lambda;
  return problem == ProblemKind::tvl1 ? 0.5 : 0.01;
}

double ExperimentConfig::effective_fwhm() const {
  if (blur_fwhm > 0.0) return blur_fwhm;
  return 12.0 * static_cast<double>(cols) / 256.0;
}

NoiseSpec ExperimentConfig::effective_noise() const {
  if (noise) return *noise;
  NoiseSpec n;
  if (problem == ProblemKind::tvl1) {
    n.kind = NoiseSpec::Kind::saltpepper;
    n.level = 0.5;
  } else {
    n.kind = NoiseSpec::Kind::gaussian;
    n.level = 0.01;
  }
  return n;
}

// ---------------------------------------------------------------- images

RealGrid synth_image(const std::string& kind, Shape shape, std::uint64_t seed) {
  if (shape.rows < 1 || shape.cols < 1) throw Error("synth_image: empty shape");
  RealGrid u(shape);
  const double R = static_cast<double>(shape.rows), C = static_cast<double>(shape.cols);
  if (kind == "constant") {
    for (double& v : u.values()) v = 0.5;
  } else if (kind == "ramp") {
    const double den = std::max(1.0, R + C - 2.0);
    for (std::size_t i = 0; i < shape.rows; ++i)
      for (std::size_t j = 0; j < shape.cols; ++j) u(i, j) = (i + j) / den;
  } else if (kind == "shapes") {
    std::mt19937_64 rng(mix_seed(seed, 3));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : u.values()) v = 0.2;
    for (int r = 0; r < 3; ++r) {
      const double i0 = unit(rng) * 0.6 * R, j0 = unit(rng) * 0.6 * C;
      const double h = (0.2 + 0.3 * unit(rng)) * R, w = (0.2 + 0.3 * unit(rng)) * C;
      const double val = 0.35 + 0.5 * unit(rng);
      for (std::size_t i = 0; i < shape.rows; ++i)
        for (std::size_t j = 0; j < shape.cols; ++j)
          if (i >= i0 && i < i0 + h && j >= j0 && j < j0 + w) u(i, j) = val;
    }
    const double ci = (0.3 + 0.4 * unit(rng)) * R, cj = (0.3 + 0.4 * unit(rng)) * C;
    const double rad = (0.12 + 0.1 * unit(rng)) * std::min(R, C);
    const double val = 0.8 * unit(rng) + 0.1;
    for (std::size_t i = 0; i < shape.rows; ++i)
      for (std::size_t j = 0; j < shape.cols; ++j) {
        const double di = i + 0.5 - ci, dj = j + 0.5 - cj;
        if (di * di + dj * dj <= rad * rad) u(i, j) = val;
      }
  } else {
    throw Error("synth_image: unknown kind '" + kind + "'");
  }
  return u;
}

RealGrid add_noise(const RealGrid& u, const NoiseSpec& noise, std::uint64_t seed) {
  RealGrid out = u;
  std::mt19937_64 rng(mix_seed(seed, 1));
  switch (noise.kind) {
    case NoiseSpec::Kind::none: break;
    case NoiseSpec::Kind::saltpepper: {
      if (noise.level < 0.0 || noise.level > 1.0) throw Error("add_noise: fraction outside [0,1]");
      const std::size_t m = u.size();
      const auto count = static_cast<std::size_t>(std::llround(noise.level * static_cast<double>(m)));
      std::vector<std::size_t> idx(m);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      // partial Fisher-Yates: the first `count` entries are a uniform sample
      for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, m - 1);
        std::swap(idx[k], idx[pick(rng)]);
        out[idx[k]] = (rng() >> 63) ? 1.0 : 0.0;
      }
      break;
    }
    case NoiseSpec::Kind::gaussian: {
      if (noise.level < 0.0) throw Error("add_noise: negative standard deviation");
      if (noise.level == 0.0) break;
      std::normal_distribution<double> nd(0.0, noise.level);
      for (double& v : out.values()) v += nd(rng);
      break;
    }
  }
  return out;
}

namespace {

struct PgmReader {
  const std::string& s;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("pgm: " + what + " at byte offset " + std::to_string(pos));
  }
  void skip_space_and_comments() {
    while (pos < s.size()) {
      const char c = s[pos];
      if (c == '#') {
        while (pos < s.size() && s[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }
  long long number() {
    skip_space_and_comments();
    if (pos >= s.size()) fail("unexpected end of header");
    if (!std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected a number");
    long long v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      if (v > (1LL << 40)) fail("number too large");
      ++pos;
    }
    return v;
  }
};

}  // namespace

RealGrid parse_pgm(const std::string& bytes) {
  PgmReader r{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    r.fail("bad magic (expected P2 or P5)");
  }
  const bool binary = bytes[1] == '5';
  r.pos = 2;
  const long long w = r.number();
  const long long h = r.number();
  const long long maxval = r.number();
  if (w < 1 || h < 1) r.fail("nonpositive dimensions");
  if (maxval < 1 || maxval > 65535) r.fail("maxval outside [1,65535]");
  RealGrid u(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
  const std::size_t m = u.size();
  if (binary) {
    if (r.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos]))) {
      r.fail("missing whitespace after header");
    }
    ++r.pos;
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() - r.pos < m * bpp) {
      r.pos = bytes.size();
      r.fail("truncated payload (" + std::to_string(m * bpp) + " bytes expected)");
    }
    for (std::size_t k = 0; k < m; ++k) {
      long long v = static_cast<unsigned char>(bytes[r.pos]);
      if (bpp == 2) v = v * 256 + static_cast<unsigned char>(bytes[r.pos + 1]);
      if (v > maxval) r.fail("sample exceeds maxval");
      u[k] = static_cast<double>(v) / static_cast<double>(maxval);
      r.pos += bpp;
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      const long long v = r.number();
      if (v > maxval) r.fail("sample exceeds maxval");
      u[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return u;
}

RealGrid read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("pgm: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pgm(ss.str());
}

std::string encode_pgm(const RealGrid& u) {
  std::string out = "P5\n" + std::to_string(u.cols()) + " " + std::to_string(u.rows()) + "\n255\n";
  for (double v : u.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::floor(c * 255.0 + 0.5))));
  }
  return out;
}

void write_pgm(const RealGrid& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("pgm: cannot write '" + path + "'");
  const std::string s = encode_pgm(u);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// ---------------------------------------------------------------- problems

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  BuiltProblem b;
  if (cfg.image.rfind("synth:", 0) == 0) {
    b.clean = synth_image(cfg.image.substr(6), {cfg.rows, cfg.cols}, cfg.seed);
  } else {
    b.clean = read_pgm(cfg.image);
  }
  b.shape = b.clean.shape();
  const double fwhm = cfg.blur_fwhm > 0.0 ? cfg.blur_fwhm : 12.0 * static_cast<double>(b.shape.cols) / 256.0;
  auto blur = gaussian_blur_operator(fwhm, b.shape);
  SaddleProblem& p = b.problem;
  p.K = blur;
  p.L = blur->norm_bound();
  p.g_kind = PrimalKind::tv;
  p.lambda = cfg.effective_lambda();
  if (!(p.lambda >= 0.0)) throw Error("lambda must be nonnegative");
  p.h_kind = cfg.problem == ProblemKind::tvl1 ? DualKind::box_data : DualKind::quadratic_data;
  p.data = add_noise(blur->apply(b.clean), cfg.effective_noise(), cfg.seed);
  p.gamma_f = cfg.problem == ProblemKind::tvl2_smooth ? cfg.gamma_smooth : 0.0;
  if (cfg.problem == ProblemKind::tvl2_smooth && !(p.gamma_f > 0.0)) {
    throw Error("tvl2-smooth needs gamma > 0");
  }
  p.unshifted_box_dual = cfg.unshifted_box_dual;
  const Variant v = cfg.algorithm;
  if (v == Variant::dual_accel && p.mu() == 0.0) {
    throw Error("dual acceleration needs a strongly convex h* (tvl2 or tvl2-smooth)");
  }
  if (v == Variant::dual_accel && p.gamma_f > 0.0) throw Error("dual acceleration needs f = 0 (use tvl2)");
  if ((v == Variant::primal_accel || v == Variant::exact_pdhg_accel || v == Variant::smooth) &&
      !(p.gamma_f > 0.0)) {
    throw Error(to_string(v) + " needs a strongly convex primal term (tvl2-smooth)");
  }
  if (v == Variant::reduced && p.gamma_f > 0.0) throw Error("reduced variant needs f = 0");
  return b;
}

GapConstant gap_constant(const SaddleProblem& problem, const StepState& step0, const RealGrid& x0,
                         const RealGrid& y0) {
  GapConstant c;
  const RealGrid v = first_prox_input(problem, step0, x0, y0);
  double val = 0.0;
  if (problem.g_kind == PrimalKind::tv) val = problem.lambda * tv_seminorm(v);
  if (val > 0.0 && std::isfinite(val)) {
    c.value = val;
    c.provenance = "inner gap of the first prox at z = 0";
  } else {
    c.value = 1.0;
    c.provenance = "fallback (first inner gap vanishes)";
  }
  return c;
}

StepState default_steps(const SaddleProblem& problem, Variant v, double beta) {
  const double L = problem.L, Lf = problem.L_f();
  StepState s;
  s.variant = v;
  switch (v) {
    case Variant::basic:
      s.sigma = 0.99 / L;
      s.beta = beta;
      s.tau = 0.99 / (Lf + s.sigma * L * L + beta * L);
      break;
    case Variant::reduced:
      s.tau = s.sigma = 0.99 / L;
      break;
    case Variant::primal_accel:
      if (!(Lf > 0.0)) throw Error("primal acceleration needs L_f > 0 for its default steps");
      s.tau = 1.0 / (2.0 * Lf);
      s.sigma = Lf / (L * L);
      break;
    case Variant::dual_accel:
      s.tau = s.sigma = 1.0 / L;
      break;
    case Variant::smooth:
      s = smooth_step_solve(problem.gamma(), problem.mu(), L, Lf);
      break;
    default: throw Error("default_steps: baseline variant, use baseline_steps");
  }
  validate_steps(s, L, Lf, problem.gamma(), problem.mu());
  return s;
}

StepState baseline_steps(const SaddleProblem& problem, Variant v, double Ls) {
  const double Lf = problem.L_f();
  StepState s;
  s.variant = v;
  if (v == Variant::exact_pdhg && Lf == 0.0) {
    s.tau = s.sigma = 0.99 / Ls;
  } else if (is_exact_baseline(v)) {
    s.tau = 0.99 / Ls;
    s.sigma = (1.0 - s.tau * Lf) / (s.tau * Ls * Ls);
  } else {
    throw Error("baseline_steps: not a baseline variant");
  }
  validate_steps(s, Ls, Lf, problem.gamma(), 0.0);
  return s;
}

double stacked_norm_bound(const SaddleProblem& problem) {
  const StackedOperator op(problem.K);
  return estimate_operator_norm(op, 1000, 1e-12, 12345).bound;
}

Schedules make_schedules(Variant v, double alpha, double q, double C) {
  Schedules s;
  using R = ErrorSchedule::Role;
  switch (v) {
    case Variant::reduced: s.eps = ErrorSchedule::polynomial(R::primal_eps, C, alpha); break;
    case Variant::basic:
    case Variant::primal_accel:
    case Variant::dual_accel: s.eps = ErrorSchedule::polynomial(R::primal_eps, C, 2.0 * alpha); break;
    case Variant::smooth: s.eps = ErrorSchedule::geometric(R::primal_eps, C, q); break;
    default: break;
  }
  return s;
}

SaddleReference compute_ground_truth(const SaddleProblem& problem, int iters, int polish_iters) {
  if (iters < 2) throw Error("compute_ground_truth: iters must be >= 2");
  SaddleReference ref;
  const Shape sh = problem.shape();
  const double Ls = stacked_norm_bound(problem);
  const StepState s0 = baseline_steps(problem, Variant::exact_pdhg, Ls);
  RunOptions opt;
  const RunRecord base = run_exact_baseline(problem, s0, Ls, iters, problem.data, RealGrid(sh), opt);
  ref.est_accuracy = std::abs(base.entries[iters - 1].F - base.entries[iters / 2 - 1].F);
  ref.x_star = base.x_best;
  ref.y_star = base.y_best;
  ref.F_star = base.F_best;
  std::ostringstream prov;
  prov.precision(17);
  prov << "exact_pdhg " << iters << " iterations (F=" << base.F_best << ")";

  if (polish_iters > 0 && problem.lambda > 0.0) {
    const Variant pv = problem.gamma_f > 0.0 ? Variant::smooth : Variant::reduced;
    const StepState ps = default_steps(problem, pv);
    RunOptions po;
    po.mode = Mode::practical;
    po.exact_target = 1e-12 * std::max(1.0, std::abs(base.F_best));
    po.max_inner = 400;
    po.check_descent = false;
    const RunRecord pol = run_inexact_pd(problem, ps, Schedules{}, polish_iters, base.x_best, base.y_best, po);
    prov << "; " << to_string(pv) << " refinement " << polish_iters << " iterations (F=" << pol.F_best << ")";
    if (pol.F_best < ref.F_star) {
      ref.x_star = pol.x_best;
      ref.y_star = pol.y_best;
      ref.F_star = pol.F_best;
    }
  }
  ref.provenance = prov.str();
  return ref;
}

// ---------------------------------------------------------------- runs

std::vector<double> relative_errors(const RunRecord& rec, double F_star, bool ergodic) {
  std::vector<double> out;
  out.reserve(rec.entries.size());
  const double den = F_star != 0.0 ? std::abs(F_star) : 1.0;
  for (const RunEntry& e : rec.entries) out.push_back(((ergodic ? e.F_erg : e.F) - F_star) / den);
  return out;
}

std::string csv_header() {
  return "n,tau,sigma,theta,F,relerr,erg_relerr,lag_gap,eps_target,eps_achieved,inner_it,cum_inner_it,rhs_bound";
}

namespace {

json config_json(const ExperimentConfig& c, Shape shape) {
  json j;
  j["problem"] = to_string(c.problem);
  j["algorithm"] = to_string(c.algorithm);
  j["lambda"] = c.effective_lambda();
  j["gamma"] = c.gamma_smooth;
  j["alpha"] = c.alpha;
  j["q"] = c.q;
  j["C_override"] = c.C;
  j["n_outer"] = c.n_outer;
  j["max_inner"] = c.max_inner;
  j["mode"] = to_string(c.mode);
  j["blur_fwhm"] = c.blur_fwhm > 0.0 ? c.blur_fwhm : 12.0 * static_cast<double>(shape.cols) / 256.0;
  j["noise"] = c.effective_noise().describe();
  j["image"] = c.image;
  j["rows"] = shape.rows;
  j["cols"] = shape.cols;
  j["seed"] = c.seed;
  j["gt_iters"] = c.gt_iters;
  j["polish_iters"] = c.polish_iters;
  j["unshifted_box_dual"] = c.unshifted_box_dual;
  j["beta"] = c.beta;
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const SaddleReference* reference) {
  if (cfg.n_outer < 1) throw Error("n_outer must be >= 1");
  BuiltProblem built;
  try {
    built = build_problem(cfg);
  } catch (const Error& e) {
    throw Error(std::string("[build] ") + e.what());
  }
  const SaddleProblem& P = built.problem;
  ExperimentResult res;
  try {
    res.reference = reference ? *reference : compute_ground_truth(P, cfg.gt_iters, cfg.polish_iters);
  } catch (const Error& e) {
    throw Error(std::string("[ground-truth] ") + e.what());
  }
  const Shape sh = built.shape;
  const RealGrid x0(sh), y0(sh);
  const Variant v = cfg.algorithm;
  std::string schedule_desc = "none";
  try {
    RunOptions opt;
    opt.mode = cfg.mode;
    opt.max_inner = cfg.max_inner;
    opt.seed = cfg.seed;
    opt.reference = &res.reference;
    if (is_exact_baseline(v)) {
      const double Ls = stacked_norm_bound(P);
      res.step0 = baseline_steps(P, v, Ls);
      res.C.value = 0.0;
      res.C.provenance = "not used";
      res.record = run_exact_baseline(P, res.step0, Ls, cfg.n_outer, x0, y0, opt);
    } else {
      res.step0 = default_steps(P, v, cfg.beta);
      res.C = gap_constant(P, res.step0, x0, y0);
      if (cfg.C > 0.0) {
        res.C.value = cfg.C;
        res.C.provenance = "user supplied";
      }
      const Schedules sch = make_schedules(v, cfg.alpha, cfg.q, res.C.value);
      schedule_desc = sch.eps.describe();
      if (P.h_kind == DualKind::box_data) opt.dual_diameter = 2.0 * std::sqrt(static_cast<double>(sh.count()));
      res.record = run_inexact_pd(P, res.step0, sch, cfg.n_outer, x0, y0, opt);
    }
  } catch (const Error& e) {
    throw Error(std::string("[solve] ") + e.what());
  }

  const double F_star = res.reference.F_star;
  const double scale = std::max(1.0, std::abs(F_star));
  const std::vector<double> rel = relative_errors(res.record, F_star, false);
  const std::vector<double> erg = relative_errors(res.record, F_star, true);

  std::ostringstream csv;
  csv << csv_header() << '\n';
  int bound_violations = 0;
  for (std::size_t k = 0; k < res.record.entries.size(); ++k) {
    const RunEntry& e = res.record.entries[k];
    csv << e.n << ',' << fmt17(e.tau) << ',' << fmt17(e.sigma) << ',' << fmt17(e.theta) << ','
        << fmt17(e.F) << ',' << fmt17(rel[k]) << ',' << fmt17(erg[k]) << ',' << fmt17(e.lag_gap) << ','
        << fmt17(e.eps_target) << ',' << fmt17(e.eps_achieved) << ',' << e.inner_iterations << ','
        << e.cum_inner_iterations << ',' << fmt17(e.rhs_bound) << '\n';
    if (std::isfinite(e.rhs_bound) && !(e.lag_gap <= e.rhs_bound + 1e-6 * scale)) ++bound_violations;
  }
  res.csv = csv.str();
  res.bound_ok = bound_violations == 0 && res.record.all_descent_ok;

  // summary fit: linear regime in semilog on the iterates, otherwise loglog
  // on the ergodic sequence
  const bool semilog = v == Variant::smooth;
  const std::vector<double>& metric = semilog ? rel : erg;
  const double from = cfg.fit_from > 0.0 ? cfg.fit_from : (semilog ? 1.0 : std::min(100.0, 0.05 * cfg.n_outer));
  const double to = cfg.fit_to > 0.0 ? cfg.fit_to : cfg.n_outer;
  std::vector<double> ns(metric.size());
  for (std::size_t k = 0; k < ns.size(); ++k) ns[k] = static_cast<double>(k + 1);
  std::string fit_error;
  try {
    res.fit = fit_loglog_slope(ns, metric, from, to, semilog);
    res.fit_ok = true;
  } catch (const Error& e) {
    fit_error = e.what();
  }

  json j;
  j["slope"] = res.fit_ok ? json(res.fit.slope) : json(nullptr);
  j["r2"] = res.fit_ok ? json(res.fit.r2) : json(nullptr);
  j["bound_ok"] = res.bound_ok;
  j["config"] = config_json(cfg, sh);
  j["fit"] = {{"metric", semilog ? "relerr" : "erg_relerr"},
              {"semilog", semilog},
              {"from", from},
              {"to", to},
              {"points", res.fit.points},
              {"excluded", res.fit.excluded},
              {"error", fit_error}};
  j["F_star"] = F_star;
  j["scale"] = scale;
  j["reference"] = {{"provenance", res.reference.provenance}, {"est_accuracy", res.reference.est_accuracy}};
  j["gap_constant"] = {{"value", res.C.value}, {"provenance", res.C.provenance}};
  j["steps0"] = {{"tau", res.step0.tau}, {"sigma", res.step0.sigma}, {"theta", res.step0.theta}, {"beta", res.step0.beta}};
  j["eps_schedule"] = schedule_desc;
  j["bound_violations"] = bound_violations;
  j["descent_ok"] = res.record.all_descent_ok;
  j["eps_within_target"] = res.record.all_eps_within_target;
  const RunEntry& last = res.record.entries.back();
  j["final"] = {{"relerr", rel.back()},
                {"erg_relerr", erg.back()},
                {"lag_gap", std::isfinite(last.lag_gap) ? json(last.lag_gap) : json(nullptr)},
                {"A", last.A},
                {"B", last.B},
                {"cum_inner_it", last.cum_inner_iterations}};
  res.json = j.dump(2) + "\n";
  return res;
}

void write_outputs(const ExperimentResult& r, const std::string& path) {
  std::string csv_path = path, json_path;
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    json_path = path.substr(0, path.size() - 4) + ".json";
  } else {
    csv_path = path + ".csv";
    json_path = path + ".json";
  }
  std::ofstream c(csv_path, std::ios::binary);
  if (!c) throw Error("cannot write '" + csv_path + "'");
  c << r.csv;
  std::ofstream j(json_path, std::ios::binary);
  if (!j) throw Error("cannot write '" + json_path + "'");
  j << r.json;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw Error("csv: unexpected header");
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 13) throw Error("csv: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    auto real = [&](int i) {
      const std::string& s = f[i];
      if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != s.size()) throw Error("csv: bad number '" + s + "' on line " + std::to_string(lineno));
      return v;
    };
    CsvRow r;
    r.n = static_cast<int>(real(0));
    r.tau = real(1);
    r.sigma = real(2);
    r.theta = real(3);
    r.F = real(4);
    r.relerr = real(5);
    r.erg_relerr = real(6);
    r.lag_gap = real(7);
    r.eps_target = real(8);
    r.eps_achieved = real(9);
    r.inner_it = static_cast<long long>(real(10));
    r.cum_inner_it = static_cast<long long>(real(11));
    r.rhs_bound = real(12);
    rows.push_back(r);
  }
  return rows;
}

CertifyReport certify_record(const std::string& csv_text, const std::string& json_text) {
  CertifyReport rep;
  const std::vector<CsvRow> rows = parse_csv(csv_text);
  const json j = json::parse(json_text);
  const double scale = j.value("scale", 1.0);
  rep.rows = static_cast<int>(rows.size());
  long long prev_cum = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const CsvRow& r = rows[k];
    if (r.n != static_cast<int>(k) + 1) {
      ++rep.order_violations;
      rep.messages.push_back("row " + std::to_string(k + 1) + ": n out of sequence");
    }
    if (r.cum_inner_it < prev_cum) {
      ++rep.order_violations;
      rep.messages.push_back("row " + std::to_string(r.n) + ": cumulative inner count decreased");
    }
    prev_cum = r.cum_inner_it;
    if (std::isfinite(r.rhs_bound) && !(r.lag_gap <= r.rhs_bound + 1e-6 * scale)) {
      ++rep.bound_violations;
      if (rep.bound_violations <= 10) {
        rep.messages.push_back("row " + std::to_string(r.n) + ": lag_gap " + fmt17(r.lag_gap) +
                               " exceeds bound " + fmt17(r.rhs_bound));
      }
    }
    if (r.eps_target > 0.0 && r.eps_achieved > r.eps_target) ++rep.eps_violations;
  }
  rep.descent_ok = j.value("descent_ok", true);
  if (!rep.descent_ok) rep.messages.push_back("descent inequality failed during the run");
  if (rep.eps_violations > 0) {
    rep.messages.push_back(std::to_string(rep.eps_violations) +
                           " inner solves ended above their target (certificates use the achieved value)");
  }
  rep.ok = rep.bound_violations == 0 && rep.order_violations == 0 && rep.descent_ok;
  return rep;
}

}  // namespace ipd
