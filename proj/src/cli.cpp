#include "dampwave/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "dampwave/config.hpp"
#include "dampwave/errors.hpp"

namespace dampwave::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + path.string());
  os << text;
  if (!os) throw std::invalid_argument("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

StateE initial_state(const ScenarioConfig& cfg, int n) {
  StateE w = StateE::zeros(n);
  for (std::size_t i = 0; i < cfg.simulate.initial_a.size() && static_cast<int>(i) < n; ++i) {
    w.a(static_cast<Eigen::Index>(i)) = cfg.simulate.initial_a[i];
  }
  for (std::size_t i = 0; i < cfg.simulate.initial_b.size() && static_cast<int>(i) < n; ++i) {
    w.b(static_cast<Eigen::Index>(i)) = cfg.simulate.initial_b[i];
  }
  return w;
}

json to_json(const Witness& w) {
  json j{{"t", w.t}, {"value", w.value}};
  if (std::isfinite(w.s)) j["s"] = w.s;
  if (std::isfinite(w.x_pos)) j["x"] = w.x_pos;
  if (w.x.size()) j["x_coeffs"] = vec(w.x);
  if (w.y.size()) j["y_coeffs"] = vec(w.y);
  if (w.z.size()) j["z_coeffs"] = vec(w.z);
  return j;
}

json to_json(const ConditionReport& r) {
  json j{{"condition_id", r.condition_id},
         {"verdict", r.verdict()},
         {"margin", finite_or_null(r.margin)},
         {"evaluations", r.evaluations},
         {"witness", r.witness ? to_json(*r.witness) : json(nullptr)},
         {"threshold_R", r.threshold_R ? json(*r.threshold_R) : json(nullptr)},
         {"sample_spec",
          {{"B1", r.sample_spec.B1},
           {"B2", r.sample_spec.B2},
           {"R_ladder", r.sample_spec.R_ladder},
           {"sample_count", r.sample_spec.sample_count},
           {"seed", r.sample_spec.seed}}}};
  return j;
}

json to_json(const AprioriConstants& k) {
  return {{"m", k.m},   {"m0", k.m0}, {"m1", k.m1}, {"R1", k.R1}, {"R2", k.R2}, {"R3", k.R3},
          {"kernel_velocity_bound", k.kernel_velocity_bound}, {"B1", k.B1}, {"B2", k.B2}};
}

json to_json(const ZeroRecord& z) {
  return {{"point", vec(z.point)},
          {"jacobian_sign", z.jacobian_sign},
          {"residual", z.residual},
          {"determinant", z.determinant},
          {"min_singular_ratio", z.min_singular_ratio}};
}

json to_json(const NewtonStats& s) {
  return {{"starts_run", s.starts_run}, {"converged", s.converged}, {"abandoned", s.abandoned},
          {"field_evals", s.field_evals}};
}

json to_json(const DegreeResult& d) {
  json zeros = json::array();
  for (const ZeroRecord& z : d.zeros) zeros.push_back(to_json(z));
  json boundary = json::array();
  for (const Eigen::VectorXd& v : d.boundary_values) boundary.push_back(vec(v));
  return {{"value", d.value},
          {"method", to_string(d.method)},
          {"rigor", to_string(d.rigor)},
          {"zeros", zeros},
          {"boundary_values", boundary},
          {"total_winding", d.total_winding},
          {"boundary_margin", finite_or_null(d.boundary_margin)}};
}

json to_json(const LadderEntry& e) {
  json fps = json::array();
  for (const ZeroRecord& z : e.fixed_points) fps.push_back(to_json(z));
  return {{"N", e.N},
          {"degree", e.degree},
          {"rigor", to_string(e.rigor)},
          {"fixed_points", fps},
          {"newton", to_json(e.stats)},
          {"constants", to_json(e.constants)},
          {"kernel_radius", e.kernel_radius},
          {"q_radius", e.q_radius}};
}

json to_json(const PeriodicCheck& p) {
  return {{"point", vec(p.point)},
          {"polish_correction", p.polish_correction},
          {"periodicity_error", p.periodicity_error},
          {"max_q_norm", p.max_q_norm},
          {"max_kernel_velocity", p.max_kernel_velocity},
          {"within_q_bound", p.within_q_bound},
          {"within_velocity_bound", p.within_velocity_bound}};
}

struct Context {
  ScenarioConfig cfg;
  fs::path out;
};

void cmd_spectrum(const Context& ctx) {
  const Decomposition dec = decompose(ctx.cfg.make_damped(ctx.cfg.make_basis()));
  std::string csv = "i,lambda_i,mu_minus_re,mu_minus_im,mu_plus_re,mu_plus_im,class\n";
  json modes = json::array();
  for (const ModeBlock& b : dec.blocks()) {
    csv += std::to_string(b.index) + "," + num(b.lambda_i) + "," + num(b.mu_minus().real()) + "," +
           num(b.mu_minus().imag()) + "," + num(b.mu_plus().real()) + "," + num(b.mu_plus().imag()) + "," +
           to_string(b.cls) + "\n";
    modes.push_back({{"i", b.index},
                     {"lambda_i", b.lambda_i},
                     {"mu_minus", {b.mu_minus().real(), b.mu_minus().imag()}},
                     {"mu_plus", {b.mu_plus().real(), b.mu_plus().imag()}},
                     {"class", to_string(b.cls)},
                     {"double_root", b.double_root()}});
  }
  write_text(ctx.out / "spectrum.csv", csv);
  write_json(ctx.out / "spectrum.json", {{"modes", modes},
                                         {"lambda", dec.config().lambda},
                                         {"c", dec.config().c},
                                         {"alpha", dec.config().alpha},
                                         {"kernel_dim", dec.kernel_dim()},
                                         {"delta", dec.delta()},
                                         {"M", dec.M_const()},
                                         {"q_plus_norm", dec.q_plus_norm()},
                                         {"q_minus_norm", dec.q_minus_norm()},
                                         {"double_root_modes", dec.double_root_modes()},
                                         {"one_over_c_modes", dec.one_over_c_modes()}});
}

void cmd_simulate(const Context& ctx) {
  const Decomposition dec = decompose(ctx.cfg.make_damped(ctx.cfg.make_basis()));
  const int n = dec.size();
  const Trajectory tr = integrate(initial_state(ctx.cfg, n), ctx.cfg.simulate.t_end, ctx.cfg.nonlinearity, dec,
                                  ctx.cfg.integrator);
  std::string csv = "t";
  for (int i = 1; i <= n; ++i) csv += ",a" + std::to_string(i);
  for (int i = 1; i <= n; ++i) csv += ",b" + std::to_string(i);
  csv += "\n";
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    csv += num(tr.times[j]);
    const Eigen::VectorXd v = tr.states[j].stacked();
    for (Eigen::Index i = 0; i < v.size(); ++i) csv += "," + num(v(i));
    csv += "\n";
  }
  write_text(ctx.out / "trajectory.csv", csv);
}

void cmd_poincare(const Context& ctx) {
  const Decomposition dec = decompose(ctx.cfg.make_damped(ctx.cfg.make_basis()));
  const StateE w0 = initial_state(ctx.cfg, dec.size());
  const Trajectory tr = integrate(w0, ctx.cfg.nonlinearity.period, ctx.cfg.nonlinearity, dec, ctx.cfg.integrator);
  write_json(ctx.out / "poincare.json", {{"period", ctx.cfg.nonlinearity.period},
                                         {"initial", vec(w0.stacked())},
                                         {"image", vec(tr.final_state().stacked())},
                                         {"displacement_norm", e_norm(tr.final_state() - w0, dec)},
                                         {"scheme", to_string(tr.scheme)},
                                         {"step", tr.step},
                                         {"error_estimate", tr.error_estimate}});
}

void cmd_find_periodic(const Context& ctx) {
  const DegreeSetup setup = ctx.cfg.make_degree_setup();
  const int N = ctx.cfg.basis.modes;
  const LadderEntry entry = poincare_degree_at(setup, N);
  const Decomposition dec = decomposition_for(setup, N);
  json sols = json::array();
  for (const ZeroRecord& z : entry.fixed_points) {
    json j = to_json(check_periodic_solution(StateE::unstack(z.point), setup.f, dec, setup.integrator,
                                             entry.constants));
    j["jacobian_sign"] = z.jacobian_sign;
    j["residual"] = z.residual;
    sols.push_back(j);
  }
  write_json(ctx.out / "periodic.json", {{"N", N},
                                         {"degree", entry.degree},
                                         {"constants", to_json(entry.constants)},
                                         {"newton", to_json(entry.stats)},
                                         {"solutions", sols}});
}

void cmd_degree(const Context& ctx) {
  const DegreeSetup setup = ctx.cfg.make_degree_setup();
  const TruncationLadder ladder = poincare_degree(setup, ctx.cfg.degree.N_ladder);
  json entries = json::array();
  for (const LadderEntry& e : ladder.entries) entries.push_back(to_json(e));
  json out{{"N_values", ladder.N_values},
           {"degrees", ladder.degrees},
           {"stable", ladder.stable},
           {"value", ladder.stable ? json(ladder.degrees.front()) : json(nullptr)},
           {"entries", entries},
           {"predicted", nullptr},
           {"averaged", nullptr}};

  const Decomposition dec = decomposition_for(setup, ctx.cfg.basis.modes);
  if (dec.kernel_dim() > 0) {
    const AprioriConstants k = apriori_constants(setup.f, dec);
    const ConditionReport g = check_G(setup.f, dec, std::max(k.B1, 1e-12), std::max(k.B2, 1e-12), setup.R_ladder,
                                      setup.g_samples, setup.seed);
    if (g.holds) {
      out["predicted"] = {{"condition", g.condition_id}, {"value", predicted_degree(dec, g.condition_id)}};
      const AveragedDegree ad = averaged_degree(setup.f, dec, *g.threshold_R + 1.0);
      out["averaged"] = {{"radius", *g.threshold_R + 1.0},
                         {"assembled", ad.assembled},
                         {"kernel_degree", to_json(ad.kernel_degree)}};
    }
  }
  write_json(ctx.out / "degree.json", out);
  ladder.require_stable();
}

void cmd_check_conditions(const Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const BasisPtr basis = cfg.make_basis();
  const Decomposition dec = decompose(cfg.make_damped(basis));
  const NonlinearitySpec& f = cfg.nonlinearity;
  const AprioriConstants k = apriori_constants(f, dec);
  json out{{"apriori", to_json(k)}};

  if (cfg.damped.k) {
    const auto [ll1, ll2] = check_LL_both(f, *basis, *cfg.damped.k, cfg.checks.ll_samples, cfg.seed);
    out["LL"] = {{"LL1", to_json(ll1)}, {"LL2", to_json(ll2)}};
  } else {
    out["LL"] = {{"applicable", false}, {"reason", "no resonance index"}};
  }
  if (f.has_infty_limit()) {
    const auto [sr1, sr2] = check_SR_both(f, *basis, cfg.checks.sr_samples);
    out["SR"] = {{"SR1", to_json(sr1)}, {"SR2", to_json(sr2)}};
  } else {
    out["SR"] = {{"applicable", false}, {"reason", "f(t, x, s) s has no finite limit as |s| -> inf"}};
  }
  if (dec.kernel_dim() > 0) {
    const auto [g1, g2] = check_G_both(f, dec, std::max(k.B1, 1e-12), std::max(k.B2, 1e-12), cfg.checks.R_ladder,
                                       cfg.checks.g_samples, cfg.seed);
    out["G"] = {{"G1", to_json(g1)}, {"G2", to_json(g2)}};
  } else {
    out["G"] = {{"applicable", false}, {"reason", "empty kernel"}};
  }
  write_json(ctx.out / "conditions.json", out);
}

void cmd_verify_averaging(const Context& ctx) {
  const auto& av = ctx.cfg.averaging;
  std::vector<std::string> names{"LINEAR_SINK", "ROTATION_SINK", "SQUARE"};
  if (av.field != "ALL") names = {av.field};
  const Box U = Box::cube(2, av.box_half_width);
  json fields = json::object();
  for (const std::string& name : names) {
    const AveragingReport rep =
        verify_kras_averaging(named_planar_field(name, av.period), av.period, U, av.mu_ladder, av.rk4_steps);
    json entries = json::array();
    for (const AveragingEntry& e : rep.entries) {
      entries.push_back({{"mu", e.mu},
                         {"skipped", e.skipped},
                         {"skip_reason", e.skipped ? json(e.skip_reason) : json(nullptr)},
                         {"degree", e.skipped ? json(nullptr) : json(e.degree)}});
    }
    fields[name] = {{"averaged_degree", rep.averaged_degree},
                    {"entries", entries},
                    {"mu_star", rep.mu_star},
                    {"agrees_below_mu_star", rep.agrees_below_mu_star}};
  }
  write_json(ctx.out / "averaging.json",
             {{"period", av.period}, {"box_half_width", av.box_half_width}, {"fields", fields}});
}

void cmd_nonexistence(const Context& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  if (cfg.nonlinearity.family != Family::KernelConst) {
    throw std::invalid_argument("nonexistence-demo needs nonlinearity.family KERNEL_CONST");
  }
  const Decomposition dec = decompose(cfg.make_damped(cfg.make_basis()));
  NewtonOptions newton;
  newton.starts = cfg.degree.newton_starts;
  const NonexistenceReport rep = nonexistence_demo(cfg.nonlinearity, dec, cfg.integrator, cfg.nonexistence.periods,
                                                   cfg.nonexistence.search_radius, newton);
  std::string csv = "t,drift\n";
  for (std::size_t j = 0; j < rep.times.size(); ++j) csv += num(rep.times[j]) + "," + num(rep.drift[j]) + "\n";
  write_text(ctx.out / "drift.csv", csv);
  json zeros = json::array();
  for (const ZeroRecord& z : rep.zeros) zeros.push_back(to_json(z));
  write_json(ctx.out / "nonexistence.json",
             {{"fitted_slope", rep.fitted_slope},
              {"expected_slope", rep.expected_slope},
              {"slope_error", std::abs(rep.fitted_slope - rep.expected_slope)},
              {"search",
               {{"radius", rep.search_radius},
                {"result", rep.exhaustive_failure() ? "EXHAUSTIVE_FAILURE" : "FIXED_POINT_FOUND"},
                {"newton", to_json(rep.stats)},
                {"zeros", zeros}}}});
}

const std::map<std::string, std::function<void(const Context&)>>& table() {
  static const std::map<std::string, std::function<void(const Context&)>> t{
      {"spectrum", cmd_spectrum},
      {"simulate", cmd_simulate},
      {"poincare", cmd_poincare},
      {"find-periodic", cmd_find_periodic},
      {"degree", cmd_degree},
      {"check-conditions", cmd_check_conditions},
      {"verify-averaging", cmd_verify_averaging},
      {"nonexistence-demo", cmd_nonexistence},
  };
  return t;
}

std::string quoted(std::string s) {
  for (char& ch : s) {
    if (ch == '"') ch = '\'';
    if (ch == '\n') ch = ' ';
  }
  return "\"" + s + "\"";
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"spectrum",         "simulate",         "poincare",
                                              "find-periodic",    "degree",           "check-conditions",
                                              "verify-averaging", "nonexistence-demo"};
  return names;
}

int run(const std::string& subcommand, const std::string& config_path, const std::optional<std::string>& out_dir,
        const std::vector<std::string>& overrides, std::ostream& err) {
  try {
    const auto it = table().find(subcommand);
    if (it == table().end()) throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
    Context ctx{load_config(config_path, overrides), {}};
    ctx.out = out_dir ? fs::path(*out_dir) : fs::path(ctx.cfg.output_dir);
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw std::invalid_argument("cannot create output directory " + ctx.out.string() + ": " + ec.message());
    it->second(ctx);
    return 0;
  } catch (const NumericalFailure& e) {
    err << "error code=" << e.code() << " message=" << quoted(e.what()) << "\n";
    return 3;
  } catch (const ConfigError& e) {
    err << "error code=INVALID_CONFIG message=" << quoted(e.what()) << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error code=PRECONDITION message=" << quoted(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error code=PRECONDITION message=" << quoted(e.what()) << "\n";
    return 2;
  }
}

}  // namespace dampwave::cli
