// hypersc: derivative checks, self-concordance certification, Newton demo
// and minimum enclosing balls from the command line.
//
// Exit codes: 0 success, 1 mathematical failure, 2 usage or input error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypersc/checks.hpp"
#include "hypersc/io.hpp"
#include "hypersc/meb.hpp"
#include "hypersc/newton.hpp"
#include "hypersc/sc_analyzer.hpp"

using namespace hypersc;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void emit(const json& j, const std::string& out_path) {
  const std::string text = io::dump_json(j);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(out_path, text);
  }
}

json witness_json(const Witness& w) {
  return {{"x", io::vec_to_json(w.x.h.coords())},
          {"e", io::vec_to_json(w.x.e)},
          {"u", io::vec_to_json(w.u)},
          {"v", io::vec_to_json(w.v)},
          {"ratio", w.ratio},
          {"source", w.source}};
}

json report_json(const SCReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) probes.push_back({{"l", p.l}, {"sc", p.sc}, {"wsc", p.wsc}});
  return {{"max_sc_ratio", r.max_sc_ratio},
          {"max_wsc_ratio", r.max_wsc_ratio},
          {"sc_witness", witness_json(r.sc_witness)},
          {"wsc_witness", witness_json(r.wsc_witness)},
          {"samples", r.samples},
          {"seed", r.seed},
          {"probe_curve", probes}};
}

// ---------------------------------------------------------------------------

struct DerivOpts {
  int dim = 2;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  double kappa = 1.0;
  double lmax = 20.0;
};

int cmd_check_derivatives(const DerivOpts& o) {
  if (o.dim < 2) throw UsageError("--dim must be at least 2");
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  DerivativeCheckConfig cfg;
  cfg.dim = o.dim;
  cfg.kappa = o.kappa;
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.lmax = o.lmax;
  const DerivativeCheckReport rep = derivative_check(cfg);
  const bool ok = rep.max_err() <= o.tol;
  json j = {{"command", "check-derivatives"},
            {"field", "sqdist"},
            {"dim", o.dim},
            {"kappa", o.kappa},
            {"samples", o.samples},
            {"seed", o.seed},
            {"tol", o.tol},
            {"max_rel_err", {{"Df", rep.max_err_d1}, {"Hf", rep.max_err_d2}, {"nablaHf", rep.max_err_d3},
                             {"nablaHf_mixed", rep.max_err_mixed}}},
            {"passed", ok}};
  j["worst"] = {{"quantity", rep.worst.quantity},
                {"closed_form", rep.worst.closed_form},
                {"finite_difference", rep.worst.finite_difference},
                {"rel_err", rep.worst.rel_err},
                {"l", rep.worst.l},
                {"sample", rep.worst.sample}};
  emit(j, "");
  if (!ok) std::cerr << "check-derivatives: max relative error " << rep.max_err() << " exceeds " << o.tol << '\n';
  return ok ? kOk : kFail;
}

// ---------------------------------------------------------------------------

struct CertifyOpts {
  std::string field = "sqdist";
  double kappa = 1.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double lmax = 50.0;
  int dim = 2;
  std::vector<double> radius;
  std::string points;
  std::string out;
};

int cmd_certify_sc(const CertifyOpts& o) {
  SamplerConfig cfg;
  cfg.seed = o.seed;
  cfg.samples = o.samples;
  cfg.lmax = o.lmax;
  cfg.dim = o.dim;
  cfg.kappa = o.kappa;
  if (o.dim < 1) throw UsageError("--dim must be positive");
  if (!(o.kappa > 0.0)) throw UsageError("--kappa must be positive");
  json j = {{"command", "certify-sc"}, {"field", o.field}, {"kappa", o.kappa}, {"dim", o.dim},
            {"samples", o.samples}, {"seed", o.seed}};
  bool ok = true;

  if (o.field == "sqdist") {
    if (o.dim < 2) throw UsageError("--dim must be at least 2 for sqdist");
    if (!(o.lmax > cfg.lmin)) throw UsageError("--lmax must exceed 0.01");
    const SCReport rep = certify_sqdist(cfg);
    j["lmax"] = o.lmax;
    j["report"] = report_json(rep);
    j["sc_bound"] = sqdist_sc_bound(o.kappa);
    j["wsc_bound"] = sqdist_wsc_bound(o.kappa);
    ok = rep.max_sc_ratio <= sqdist_sc_bound(o.kappa) + 1e-9 && rep.max_wsc_ratio <= sqdist_wsc_bound(o.kappa) + 1e-9;
  } else if (o.field == "ball-barrier") {
    if (o.radius.empty()) throw UsageError("--radius is required for ball-barrier");
    json rows = json::array();
    for (double r : o.radius) {
      if (!(r > 0.0)) throw UsageError("--radius must be positive");
      const SCReport rep = certify(ball_barrier_sampler(r, cfg), cfg);
      const double bound = ball_barrier_sc_bound(r, o.kappa);
      const bool pass = rep.max_sc_ratio <= bound + 1e-9;
      ok = ok && pass;
      rows.push_back({{"radius", r}, {"sc_bound", bound}, {"report", report_json(rep)}, {"passed", pass}});
    }
    j["radii"] = rows;
    // Unit-curvature tightness configuration of F_{p,R}.
    json scan = json::array();
    for (const auto& t : tightness_scan(o.radius, std::max(2, o.dim))) {
      scan.push_back({{"radius", t.radius},
                      {"wsc", t.wsc},
                      {"lower_bound", t.lower_bound},
                      {"third_derivative_lower_bound", t.third_derivative_lower_bound},
                      {"upper_bound", t.upper_bound}});
    }
    j["tightness_scan"] = scan;
  } else if (o.field == "meb-barrier") {
    if (o.points.empty()) throw UsageError("--points is required for meb-barrier");
    const io::PointsFile pf = io::read_points(o.points);
    MebInstance inst{pf.points, pf.kappa, 1.0};
    const MebProblem mp = build_problem(inst);
    const CaseSampler sampler = meb_interior_sampler(mp);
    const SCReport rep = certify(sampler, cfg);
    const BarrierParameterResult bp = barrier_parameter_check(sampler, mp.nu, std::min<std::size_t>(o.samples, 20000),
                                                              o.seed);
    j["points"] = o.points;
    j["nu"] = mp.nu;
    j["K"] = mp.k;
    j["R"] = mp.big_r;
    j["report"] = report_json(rep);
    j["sc_bound"] = 1.0;
    j["barrier_parameter"] = {{"passed", bp.passed}, {"worst_ratio", bp.worst_ratio}};
    ok = rep.max_sc_ratio <= 1.0 + 1e-9 && bp.passed;
  } else {
    throw UsageError("--field must be sqdist, ball-barrier or meb-barrier");
  }
  j["passed"] = ok;
  emit(j, o.out);
  if (!ok) std::cerr << "certify-sc: a sampled ratio exceeds its analytic bound\n";
  return ok ? kOk : kFail;
}

// ---------------------------------------------------------------------------

struct NewtonOpts {
  double radius = 5.0;
  double kappa = 1.0;
  int dim = 2;
  double start = 0.9;  ///< d(p, x0) / R
  std::uint64_t seed = 0;
  double target = 1e-10;
  std::string trace;
  std::string out;
};

int cmd_newton_demo(const NewtonOpts& o) {
  if (!(o.radius > 0.0)) throw UsageError("--radius must be positive");
  if (!(o.start >= 0.0 && o.start < 1.0)) throw UsageError("--start must lie in [0, 1)");
  if (o.dim < 1) throw UsageError("--dim must be positive");
  Rng rng(splitmix64(o.seed));
  const HPoint p = HPoint::apex(o.dim, o.kappa);
  const auto f = make_ball_barrier(p, o.radius);
  const HPoint x0 = displaced(p, unit_coords(rng, o.dim), o.start * o.radius * std::sqrt(o.kappa));
  // The minimizer is p, where F = -log R^2.
  MinimizeOptions opt;
  opt.lower_bound = -2.0 * std::log(o.radius);
  const MinimizeResult r = minimize(*f, ProductPoint(x0), 1.0, o.target, opt);

  json rows = json::array();
  for (const auto& t : r.trace.records) {
    rows.push_back({{"iter", t.iter},
                    {"kind", to_string(t.kind)},
                    {"lambda", t.lambda},
                    {"value", t.value},
                    {"predicted", t.predicted},
                    {"observed", t.observed}});
  }
  json j = {{"command", "newton-demo"},
            {"field", "ball-barrier"},
            {"radius", o.radius},
            {"kappa", o.kappa},
            {"dim", o.dim},
            {"seed", o.seed},
            {"start", o.start},
            {"damped_steps", r.trace.damped_steps},
            {"full_steps", r.trace.full_steps},
            {"final_decrement", r.decrement},
            {"distance_to_minimizer", distance(r.x.h, p)},
            {"steps", rows}};
  if (!o.trace.empty()) {
    std::ostringstream csv;
    csv << "iter,kind,lambda,value,predicted,observed\n";
    for (const auto& t : r.trace.records) {
      csv << t.iter << ',' << to_string(t.kind) << ',' << io::format_double(t.lambda) << ','
          << io::format_double(t.value) << ',' << io::format_double(t.predicted) << ','
          << io::format_double(t.observed) << '\n';
    }
    io::write_text_file(o.trace, csv.str());
  }
  emit(j, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct MebOpts {
  std::string points;
  double epsilon = 1e-5;
  long iters = 1000000;
  std::string trace;
  std::string out;
};

json points_echo(const io::PointsFile& pf, const std::string& path) {
  return {{"points", path}, {"model", io::to_string(pf.model)}, {"kappa", pf.kappa}, {"dim", pf.dim},
          {"m", pf.points.size()}};
}

int cmd_meb(const MebOpts& o) {
  if (!(o.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  const io::PointsFile pf = io::read_points(o.points);
  const MebSolution sol = solve(MebInstance{pf.points, pf.kappa, o.epsilon});
  json echo = points_echo(pf, o.points);
  echo["command"] = "meb";
  echo["epsilon"] = o.epsilon;
  echo["epsilon_prime"] = sol.epsilon_prime;
  echo["nu"] = sol.nu;
  echo["K"] = sol.k;
  echo["R"] = sol.big_r;
  echo["alpha0"] = sol.alpha0;
  echo["beta"] = PathParams{}.beta;
  if (!o.trace.empty()) {
    std::ostringstream csv;
    io::write_trace_csv(csv, sol.trace);
    io::write_text_file(o.trace, csv.str());
  }
  emit(io::result_to_json(io::to_result(sol, echo)), o.out);
  return kOk;
}

int cmd_oracle_meb(const MebOpts& o) {
  if (o.iters < 0) throw UsageError("--iters must be nonnegative");
  const io::PointsFile pf = io::read_points(o.points);
  const MebSolution sol = oracle_solve(MebInstance{pf.points, pf.kappa, 1.0}, o.iters);
  json echo = points_echo(pf, o.points);
  echo["command"] = "oracle-meb";
  echo["iters"] = o.iters;
  emit(io::result_to_json(io::to_result(sol, echo)), o.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-concordance tools and interior-point solvers on hyperbolic space"};
  app.require_subcommand(1);
  int code = kOk;

  DerivOpts dopt;
  auto* deriv = app.add_subcommand("check-derivatives", "Compare closed-form derivatives of the squared distance with finite differences");
  deriv->add_option("--dim", dopt.dim, "Dimension n of H^n")->capture_default_str();
  deriv->add_option("--samples", dopt.samples, "Number of random (x, u, v)")->capture_default_str();
  deriv->add_option("--seed", dopt.seed, "Random seed")->capture_default_str();
  deriv->add_option("--tol", dopt.tol, "Relative error tolerance")->capture_default_str();
  deriv->add_option("--kappa", dopt.kappa, "Curvature magnitude")->capture_default_str();
  deriv->add_option("--lmax", dopt.lmax, "Largest unit-curvature distance to the pole")->capture_default_str();
  deriv->callback([&] { code = cmd_check_derivatives(dopt); });

  CertifyOpts copt;
  auto* cert = app.add_subcommand("certify-sc", "Search for the worst self-concordance ratio of a field");
  cert->add_option("--field", copt.field, "sqdist | ball-barrier | meb-barrier")
      ->check(CLI::IsMember({"sqdist", "ball-barrier", "meb-barrier"}))
      ->capture_default_str();
  cert->add_option("--kappa", copt.kappa, "Curvature magnitude")->capture_default_str();
  cert->add_option("--samples", copt.samples, "Number of random samples")->capture_default_str();
  cert->add_option("--seed", copt.seed, "Random seed")->capture_default_str();
  cert->add_option("--lmax", copt.lmax, "Largest sampled unit-curvature distance (sqdist)")->capture_default_str();
  cert->add_option("--dim", copt.dim, "Dimension n of H^n")->capture_default_str();
  cert->add_option("--radius", copt.radius, "Ball radius; repeat for a sweep (ball-barrier)");
  cert->add_option("--points", copt.points, "Points file (meb-barrier)");
  cert->add_option("--out", copt.out, "Write the report here instead of stdout");
  cert->callback([&] { code = cmd_certify_sc(copt); });

  NewtonOpts nopt;
  auto* newton = app.add_subcommand("newton-demo", "Minimize the ball barrier with damped and full Newton steps");
  newton->add_option("--radius", nopt.radius, "Ball radius")->capture_default_str();
  newton->add_option("--kappa", nopt.kappa, "Curvature magnitude")->capture_default_str();
  newton->add_option("--dim", nopt.dim, "Dimension n of H^n")->capture_default_str();
  newton->add_option("--start", nopt.start, "Start at distance start * radius from the center")->capture_default_str();
  newton->add_option("--seed", nopt.seed, "Random seed for the start direction")->capture_default_str();
  newton->add_option("--target", nopt.target, "Stop when the decrement is at most this")->capture_default_str();
  newton->add_option("--trace", nopt.trace, "Write a per-step CSV trace");
  newton->add_option("--out", nopt.out, "Write the JSON report here instead of stdout");
  newton->callback([&] { code = cmd_newton_demo(nopt); });

  MebOpts mopt;
  auto* meb = app.add_subcommand("meb", "Minimum enclosing ball by path-following");
  meb->add_option("--points", mopt.points, "Points file (JSON)")->required();
  meb->add_option("--epsilon", mopt.epsilon, "Target accuracy on the radius")->capture_default_str();
  meb->add_option("--trace", mopt.trace, "Write the CSV iteration trace");
  meb->add_option("--out", mopt.out, "Write the result here instead of stdout");
  meb->callback([&] { code = cmd_meb(mopt); });

  MebOpts oopt;
  auto* oracle = app.add_subcommand("oracle-meb", "Minimum enclosing ball by the farthest-point iteration");
  oracle->add_option("--points", oopt.points, "Points file (JSON)")->required();
  oracle->add_option("--iters", oopt.iters, "Number of iterations")->capture_default_str();
  oracle->add_option("--out", oopt.out, "Write the result here instead of stdout");
  oracle->callback([&] { code = cmd_oracle_meb(oopt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kFail;
  }
  return code;
}
