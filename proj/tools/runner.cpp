#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "crnhj/chje.hpp"
#include "crnhj/dhje.hpp"
#include "crnhj/ldp.hpp"
#include "crnhj/segment.hpp"
#include "crnhj/simulate.hpp"
#include "crnhj/version.hpp"

namespace crnhj::cli {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

/// Everything a subcommand produces before it touches the filesystem.
struct Artifacts {
  json report = json::object();
  std::map<std::string, std::string> csv;  // file suffix -> content
};

struct Session {
  const ExperimentConfig& cfg;
  const RunContext& ctx;
  Domain dom;

  void note(const std::string& msg) const {
    if (ctx.verbose && ctx.log) *ctx.log << msg << '\n';
  }

  double need_h() const {
    if (!cfg.run.h) throw ConfigError(ErrorKind::ValidationError, "run.h is required", {{"run.h", "required by this subcommand"}});
    return *cfg.run.h;
  }
  const std::vector<double>& need_ladder() const {
    if (cfg.run.h_ladder.empty())
      throw ConfigError(ErrorKind::ValidationError, "run.h_ladder is required",
                        {{"run.h_ladder", "required by this subcommand"}});
    return cfg.run.h_ladder;
  }
  const Vec& need_x0() const {
    if (cfg.run.x0.empty())
      throw ConfigError(ErrorKind::ValidationError, "run.x0 is required", {{"run.x0", "required by this subcommand"}});
    return cfg.run.x0;
  }
  std::uint64_t need_seed() const {
    if (!cfg.run.seed)
      throw ConfigError(ErrorKind::ValidationError, "run.seed is required",
                        {{"run.seed", "randomness needs a seed"}});
    return *cfg.run.seed;
  }
  void need_chord_network() const {
    if (cfg.network.n_species != 2 || cfg.network.n_reactions() != 1)
      fail(ErrorKind::InvalidArgument, "segment commands need two species and one reaction");
  }

  /// Segment at the configured offset beta, with no mesh attached.
  SegmentGrid chord() const {
    need_chord_network();
    SegmentGrid s;
    s.x0 = need_x0();
    s.nu = to_vec(cfg.network.reaction_vector(0));
    s.nu_perp = perpendicular(s.nu);
    s.beta = cfg.run.beta;
    std::tie(s.a, s.b) = segment_bounds(dom, s.x0, s.nu, s.beta);
    s.h = s.b > s.a ? s.b - s.a : 1.0;
    return s;
  }

  std::function<double(double)> chord_w0(const SegmentGrid& s) const {
    if (cfg.run.w0) return [f = *cfg.run.w0](double a) { return f(a); };
    return [f = cfg.run.u0, s](double a) { return f(s.point(a)); };
  }

  std::vector<double> snapshot_times() const {
    return cfg.run.times.empty() ? std::vector<double>{cfg.run.t} : cfg.run.times;
  }
};

json mc_json(const McEstimate& m) { return {{"estimate", m.value}, {"stderr", m.std_error}, {"n", m.n}}; }

Artifacts cmd_simulate(const Session& s) {
  const auto& r = s.cfg.run;
  const double h = s.need_h();
  const std::uint64_t seed = s.need_seed();
  LatticeGrid grid = build_grid(s.dom, s.cfg.network, h);
  JumpGraph g = jump_graph(grid);
  const std::size_t start = grid.nearest(s.need_x0());
  s.note("grid points: " + std::to_string(grid.size()));

  Trajectory path = simulate_path(g, start, r.t, seed);
  std::vector<std::string> cols{"t"};
  for (const auto& name : s.cfg.species) cols.push_back(name);
  Csv traj(cols);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    std::vector<double> row{path.times[k]};
    for (double x : grid.coords[path.states[k]]) row.push_back(x);
    traj.row(row);
  }

  auto states = ensemble_terminal_states(g, start, r.t, r.samples, seed, s.ctx.threads);
  auto counts = histogram(states, grid.size());
  std::vector<std::string> hcols;
  for (const auto& name : s.cfg.species) hcols.push_back(name);
  hcols.push_back("count");
  Csv hist(hcols);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::vector<double> row = grid.coords[p];
    row.push_back(static_cast<double>(counts[p]));
    hist.row(row);
  }

  GridFunction u0 = grid.evaluate([&](const Vec& x) { return r.u0(x); });
  std::vector<double> u(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) u[k] = u0[states[k]];
  McEstimate est = wkb_from_samples(u, h);

  Artifacts a;
  a.report = {{"n", r.samples},           {"t_end", r.t},        {"h", h},
              {"seed", seed},             {"start", grid.coords[start]},
              {"jumps", path.times.size() - 1},
              {"estimate", est.value},    {"stderr", est.std_error}};
  a.csv[""] = traj.str();
  a.csv["-histogram"] = hist.str();
  return a;
}

Artifacts cmd_solve_dhje(const Session& s) {
  const auto& r = s.cfg.run;
  const double h = s.need_h();
  LatticeGrid grid = build_grid(s.dom, s.cfg.network, h);
  JumpGraph g = jump_graph(grid);
  GridFunction u0 = grid.evaluate([&](const Vec& x) { return r.u0(x); });
  s.note("grid points: " + std::to_string(grid.size()));

  GridFunction ref = evolve_ode(g, u0, r.t);
  const double dt0 = r.dt ? *r.dt : r.t / 10.0;
  json ladder = json::array();
  GridFunction finest;
  for (double dt : {dt0, dt0 / 2.0, dt0 / 4.0}) {
    auto steps = static_cast<std::size_t>(std::floor(r.t / dt + 1e-9));
    GridFunction u = u0;
    double residual = 0.0;
    std::size_t iterations = 0;
    for (std::size_t n = 0; n < steps; ++n) {
      ResolventSolve rs = resolvent(g, u, dt);
      residual = std::max(residual, rs.residual);
      iterations += rs.iterations;
      u = std::move(rs.u);
    }
    ladder.push_back({{"dt", dt}, {"steps", steps}, {"max_residual", residual},
                      {"sweeps", iterations}, {"sup_diff_to_ode", sup_diff(u, ref)}});
    s.note("dt " + fmt(dt) + " gap " + fmt(sup_diff(u, ref)));
    finest = std::move(u);
  }

  std::vector<std::string> cols;
  for (std::size_t l = 0; l < grid.dim; ++l) cols.push_back("i" + std::to_string(l + 1));
  for (const auto& name : s.cfg.species) cols.push_back(name);
  cols.push_back("value");
  cols.push_back("value_semigroup");
  Csv csv(cols);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::vector<double> row;
    for (long q : grid.index[p]) row.push_back(static_cast<double>(q));
    for (double x : grid.coords[p]) row.push_back(x);
    row.push_back(ref[p]);
    row.push_back(finest[p]);
    csv.row(row);
  }
  Artifacts a;
  a.report = {{"h", h},
              {"t", r.t},
              {"grid_points", grid.size()},
              {"stationarity_residual", sup_norm(apply_Hh(g, u0))},
              {"dt_ladder", ladder}};
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_solve_segment(const Session& s) {
  const auto& r = s.cfg.run;
  const double h = s.need_h();
  s.need_chord_network();
  SegmentGrid seg = build_segment_grid(s.dom, s.cfg.network, s.need_x0(), r.beta, r.r, h);
  SegmentHamiltonian ham = segment_hamiltonian(s.cfg.network, seg);
  GridFunction w0(seg.size());
  auto w0f = s.chord_w0(seg);
  for (std::size_t i = 0; i < seg.size(); ++i) w0[i] = w0f(seg.alpha_at(i));
  auto times = s.snapshot_times();
  auto snaps = evolve_ode_times(segment_graph(seg, ham), w0, times);

  Csv csv({"t", "alpha", "w"});
  for (std::size_t n = 0; n < times.size(); ++n)
    for (std::size_t i = 0; i < seg.size(); ++i) csv.row({times[n], seg.alpha_at(i), snaps[n][i]});
  Artifacts a;
  a.report = {{"h", h},         {"beta", seg.beta}, {"r", seg.r},   {"a", seg.a},
              {"b", seg.b},     {"k_a", seg.k_a},   {"k_b", seg.k_b}, {"points", seg.size()},
              {"times", times}};
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_solve_chje(const Session& s) {
  const auto& r = s.cfg.run;
  SegmentGrid seg = s.chord();
  Hamiltonian1D ham = hamiltonian_1d(seg, segment_hamiltonian(s.cfg.network, seg));
  auto w0 = s.chord_w0(seg);
  FdOptions fo;
  fo.dt = r.dt;
  ValueField fd = solve_fd(ham, w0, r.t, r.n_alpha, fo);
  s.note("fd done");
  ValueField dp = lax_oleinik_dp(ham, w0, r.t, r.n_alpha, r.n_v, r.n_t);
  s.note("dp done");
  RateTable tab = rate_function(ham, r.alpha, r.t, r.n_alpha, r.n_t);
  const double var = variational_value(tab, w0);

  Csv csv({"alpha", "w_fd", "w_dp"});
  double gap = 0.0;
  for (std::size_t i = 0; i < dp.alpha.size(); ++i) {
    double f = fd.at(dp.alpha[i]);
    gap = std::max(gap, std::abs(f - dp.last()[i]));
    csv.row({dp.alpha[i], f, dp.last()[i]});
  }
  const double res = std::max({fd.resolution, dp.resolution, tab.resolution});
  Artifacts a;
  a.report = {{"a", ham.a},
              {"b", ham.b},
              {"t", r.t},
              {"alpha", r.alpha},
              {"fd", fd.at(r.alpha)},
              {"dp", dp.at(r.alpha)},
              {"variational", var},
              {"sup_fd_dp", gap},
              {"discrepancies",
               {{"fd_dp", std::abs(fd.at(r.alpha) - dp.at(r.alpha))},
                {"fd_variational", std::abs(fd.at(r.alpha) - var)},
                {"dp_variational", std::abs(dp.at(r.alpha) - var)}}},
              {"resolution", res}};
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_rate(const Session& s) {
  const auto& r = s.cfg.run;
  SegmentGrid seg = s.chord();
  Hamiltonian1D ham = hamiltonian_1d(seg, segment_hamiltonian(s.cfg.network, seg));
  RateTable tab = rate_function(ham, r.alpha, r.t, r.n_alpha, r.n_t);
  ReflectedPath mf = mean_field_path(ham, r.alpha, r.t, r.t / 1000.0);
  Csv csv({"y", "I"});
  for (std::size_t j = 0; j < tab.y.size(); ++j) csv.row({tab.y[j], render_rate(tab.I[j])});
  Artifacts a;
  a.report = {{"a", ham.a},
              {"b", ham.b},
              {"t", r.t},
              {"alpha", r.alpha},
              {"argmin", tab.y[tab.argmin]},
              {"min_rate", tab.I[tab.argmin]},
              {"mean_field_endpoint", mf.eta.back()},
              {"rate_at_mean_field", tab.at(mf.eta.back())},
              {"resolution", tab.resolution},
              {"v_max", tab.v_max}};
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_meanfield(const Session& s) {
  const auto& r = s.cfg.run;
  SegmentGrid seg = s.chord();
  Hamiltonian1D ham = hamiltonian_1d(seg, segment_hamiltonian(s.cfg.network, seg));
  ReflectedPath p = mean_field_path(ham, r.alpha, r.t, r.dt ? *r.dt : r.t / 1000.0);
  Csv csv({"t", "eta", "l"});
  for (std::size_t k = 0; k < p.times.size(); ++k) csv.row({p.times[k], p.eta[k], p.l[k]});
  Artifacts a;
  a.report = {{"a", ham.a}, {"b", ham.b}, {"t", r.t}, {"alpha", r.alpha}, {"eta_end", p.eta.back()}};
  a.report["hit_time"] = p.hit_time ? json(*p.hit_time) : json(nullptr);
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_ldp_check(const Session& s) {
  const auto& r = s.cfg.run;
  s.need_chord_network();
  VaradhanOptions opt;
  opt.mc_samples = r.samples;
  opt.seed = s.need_seed();
  opt.threads = s.ctx.threads;
  VaradhanReport rep =
      varadhan_check(s.cfg.network, s.dom, s.need_x0(), [&](const Vec& x) { return r.u0(x); },
                     r.t, s.need_ladder(), opt);
  Csv csv({"h", "beta", "r", "omega0", "compliant", "exact", "mc", "mc_stderr", "discrepancy"});
  json entries = json::array();
  for (const auto& e : rep.entries) {
    csv.row({e.h, e.start.beta, e.start.r, e.start.omega0, e.start.compliant ? 1.0 : 0.0, e.exact,
             e.mc.value, e.mc.std_error, e.discrepancy});
    entries.push_back({{"h", e.h},
                       {"start", e.start.point},
                       {"beta", e.start.beta},
                       {"r", e.start.r},
                       {"omega0", e.start.omega0},
                       {"compliant", e.start.compliant},
                       {"exact", e.exact},
                       {"mc", mc_json(e.mc)},
                       {"discrepancy", e.discrepancy}});
  }
  Artifacts a;
  a.report = {{"t", rep.t},
              {"x0", rep.x0},
              {"continuous", rep.continuous},
              {"continuous_variational", rep.continuous_variational},
              {"discrepancies", rep.discrepancies()},
              {"entries", entries}};
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_lln(const Session& s) {
  const auto& r = s.cfg.run;
  s.need_chord_network();
  LlnOptions opt;
  opt.n_samples = r.samples;
  opt.seed = s.need_seed();
  opt.threads = s.ctx.threads;
  LlnReport rep =
      lln_concentration(s.cfg.network, s.dom, s.need_x0(), r.t, r.eps, s.need_ladder(), opt);
  Csv csv({"h", "tail", "tail_stderr", "bound"});
  json rows = json::array();
  for (const auto& row : rep.rows) {
    csv.row({row.h, row.tail, row.tail_se, row.bound});
    rows.push_back({{"h", row.h},
                    {"tail", row.tail},
                    {"tail_stderr", row.tail_se},
                    {"bound", row.bound},
                    {"within", row.tail <= row.bound + 3.0 * row.tail_se}});
  }
  Artifacts a;
  a.report = {{"t", rep.t},           {"eps", rep.eps},       {"x_star", rep.x_star},
              {"beta", rep.beta},     {"resolution", rep.resolution}, {"rows", rows}};
  a.csv[""] = csv.str();
  return a;
}

Artifacts cmd_counterexample(const Session& s) {
  std::vector<double> hs = s.cfg.run.h_ladder;
  if (hs.empty()) hs.push_back(s.need_h());
  Csv csv({"h", "grid_points", "stationarity_residual", "test_value"});
  json rows = json::array();
  CounterexampleReport first;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    CounterexampleReport c = counterexample_check(hs[k]);
    if (k == 0) first = c;
    csv.row({c.h, static_cast<double>(c.grid_size), c.stationarity_residual, c.test_value});
    rows.push_back({{"h", c.h},
                    {"grid_points", c.grid_size},
                    {"stationarity_residual", c.stationarity_residual},
                    {"gap_min", c.gap_min},
                    {"gap_at_touch", c.gap_at_touch},
                    {"test_value", c.test_value},
                    {"verdict", c.verdict}});
  }
  Artifacts a;
  a.report = {{"verdict", first.verdict}, {"value", first.test_value}, {"rows", rows}};
  a.csv[""] = csv.str();
  return a;
}

using Command = Artifacts (*)(const Session&);

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"simulate", cmd_simulate},       {"solve-dhje", cmd_solve_dhje},
      {"solve-segment", cmd_solve_segment}, {"solve-chje", cmd_solve_chje},
      {"rate", cmd_rate},               {"meanfield", cmd_meanfield},
      {"ldp-check", cmd_ldp_check},     {"lln", cmd_lln},
      {"counterexample", cmd_counterexample}};
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << content;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate",  "solve-dhje", "solve-segment",
                                              "solve-chje", "rate",       "meanfield",
                                              "ldp-check", "lln",        "counterexample"};
  return names;
}

RunResult run(const ExperimentConfig& cfg, const std::string& subcommand, const RunContext& ctx) {
  const std::string hash = config_hash(cfg);
  const std::filesystem::path dir(ctx.out_dir);
  const std::string stem = subcommand + "-" + hash;
  RunResult result;
  json report{{"subcommand", subcommand}, {"config_hash", hash}, {"version", kVersion}};
  try {
    auto it = commands().find(subcommand);
    if (it == commands().end()) fail(ErrorKind::InvalidArgument, "unknown subcommand " + subcommand);
    std::filesystem::create_directories(dir);
    Session session{cfg, ctx, cfg.domain.build()};
    Artifacts art = it->second(session);
    report["status"] = "ok";
    report["result"] = std::move(art.report);
    for (const auto& [suffix, content] : art.csv) {
      auto path = dir / (stem + suffix + ".csv");
      write_file(path, content);
      result.files.push_back(path.string());
    }
  } catch (const Error& e) {
    json fields = json::array();
    if (auto* ce = dynamic_cast<const ConfigError*>(&e))
      for (const auto& f : ce->fields()) fields.push_back({{"field", f.field}, {"message", f.message}});
    report["status"] = "error";
    report["error"] = {{"kind", e.kind_name()}, {"message", e.what()}, {"fields", fields}};
    result.exit_code = 2;
  }
  try {
    std::filesystem::create_directories(dir);
    auto path = dir / (stem + ".json");
    write_file(path, report.dump(2) + "\n");
    result.files.push_back(path.string());
  } catch (const std::exception& e) {
    if (ctx.log) *ctx.log << "error: " << e.what() << '\n';
    result.exit_code = 3;
  }
  return result;
}

}  // namespace crnhj::cli
