// soclearn command-line front end.
//
// Subcommands: simulate, grid, fit, waic, summarize, recover, schedule,
// curve, gen, deltas. Every stochastic command requires --seed and is
// reproducible byte-for-byte; grid results are identical for any --workers.
// Usage errors exit with status 2, runtime failures with status 1.

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "soclearn/config.hpp"
#include "soclearn/csv.hpp"
#include "soclearn/data.hpp"
#include "soclearn/dynamics.hpp"
#include "soclearn/measurement.hpp"
#include "soclearn/recover.hpp"
#include "soclearn/summary.hpp"
#include "soclearn/waic.hpp"

namespace {

using namespace soclearn;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Apply a config file (if given), then let explicit flags override it.
void merge_config(const CLI::App& cmd, const std::string& config_path, RunConfig& run,
                  const std::map<std::string, std::string>& flag_to_key) {
  if (!config_path.empty()) run.load(config_path);
  for (const auto& [flag, key] : flag_to_key) {
    const CLI::Option* opt = cmd.get_option(flag);
    if (opt->count() > 0) run.set(key, opt->as<std::string>());
  }
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
  CsvTable table;
  table.header = {"period", "share"};
  for (std::size_t p = 0; p < traj.shares.size(); ++p)
    table.rows.push_back({std::to_string(p), fmt(traj.shares[p])});
  write_csv(path, table);
}

void write_grid(const std::string& path, const GridResult& result) {
  CsvTable table;
  table.header = {"mean_pref", "f", "phi", "delta", "minority", "avg_final_share"};
  for (const auto& cell : result.cells)
    table.rows.push_back({fmt9(cell.mean_pref), fmt9(cell.f), fmt9(cell.phi),
                          fmt9(cell.delta), cell.minority ? "1" : "0",
                          fmt(cell.avg_final_share)});
  write_csv(path, table);
}

void write_posterior(const std::string& path, const Posterior& post) {
  CsvTable table;
  table.header = {"draw", "chain", "parameter", "value"};
  const int per_chain = post.raw.draws_per_chain;
  for (std::size_t s = 0; s < post.samples.size(); ++s) {
    const int chain = per_chain > 0 ? static_cast<int>(s) / per_chain : 0;
    const int draw = per_chain > 0 ? static_cast<int>(s) % per_chain : static_cast<int>(s);
    for (std::size_t c = 0; c < post.names.size(); ++c)
      table.rows.push_back({std::to_string(draw), std::to_string(chain), post.names[c],
                            fmt(post.samples[s][c])});
  }
  write_csv(path, table);
}

void write_summary(const std::string& path, const std::vector<SummaryRow>& rows,
                   double lo, double hi) {
  CsvTable table;
  char lo_name[16], hi_name[16];
  std::snprintf(lo_name, sizeof lo_name, "p%g", lo * 100.0);
  std::snprintf(hi_name, sizeof hi_name, "p%g", hi * 100.0);
  table.header = {"parameter", "mean", lo_name, hi_name};
  for (const auto& row : rows)
    table.rows.push_back({row.name, fmt(row.mean), fmt(row.p_lo), fmt(row.p_hi)});
  write_csv(path, table);
}

void write_waic(const std::string& path, const WaicResult& result) {
  CsvTable table;
  table.header = {"waic", "lppd", "penalty"};
  table.rows.push_back({fmt(result.waic), fmt(result.lppd), fmt(result.penalty)});
  write_csv(path, table);
}

void write_loglik(const std::string& path, const std::vector<std::vector<double>>& loglik) {
  CsvTable table;
  table.header = {};
  if (!loglik.empty())
    for (std::size_t m = 0; m < loglik.front().size(); ++m)
      table.header.push_back("obs_" + std::to_string(m));
  for (const auto& row : loglik) {
    std::vector<std::string> out;
    out.reserve(row.size());
    for (double v : row) out.push_back(fmt(v));
    table.rows.push_back(std::move(out));
  }
  write_csv(path, table);
}

void write_fit_tables(const std::string& dir, const Posterior& post,
                      const std::vector<Observation>& observations) {
  {
    CsvTable table;
    table.header = {"individual_id", "task", "mean_probability", "num_choices"};
    for (const auto& fit : individual_fit(post, observations))
      table.rows.push_back({std::to_string(fit.individual_id), to_string(fit.task),
                            fmt(fit.mean_probability), std::to_string(fit.num_choices)});
    write_csv(join_path(dir, "fit_individual.csv"), table);
  }
  {
    CsvTable table;
    table.header = {"task", "treatment", "n_pref", "observed", "predicted", "count"};
    for (const auto& cell : aggregate_fit(post, observations))
      table.rows.push_back({to_string(cell.task), to_string(cell.treatment),
                            std::to_string(cell.n_preferred), fmt(cell.observed),
                            fmt(cell.predicted), std::to_string(cell.count)});
    write_csv(join_path(dir, "fit_aggregate.csv"), table);
  }
}

double parse_double_field(const CsvTable& table, std::size_t row, std::size_t col) {
  try {
    return std::stod(table.rows[row][col]);
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row + 2) + ": '" +
                             table.rows[row][col] + "' is not a number");
  }
}

// ---- subcommand bodies -----------------------------------------------------

struct SimulateArgs {
  std::string out = "trajectory.csv", config;
  std::uint64_t seed = 0;
  double mean_pref = 1.0, lambda = 1.0, f = 1.0, phi = 1.0, delta = 0.0;
};

int run_simulate(const CLI::App& cmd, const SimulateArgs& args) {
  RunConfig run;
  merge_config(cmd, args.config, run,
               {{"--periods", "periods"},
                {"--population", "population"},
                {"--sample-size", "sample_size"}});
  const int population = run.get_int("population");
  Rng prefs(derive_seed(args.seed, /*stream=*/0x5e1));
  std::vector<PopulationMember> pop(static_cast<std::size_t>(population));
  for (auto& member : pop) {
    const double pref = prefs.normal(args.mean_pref, 1.0);
    member.params = AgentParams{args.lambda, args.f, args.phi, args.delta};
    member.nu = {pref / 2.0, -pref / 2.0};
  }
  SimConfig sim;
  sim.periods = run.get_int("periods");
  sim.sample_size = run.get_int("sample_size");
  sim.seed = derive_seed(args.seed, /*stream=*/0x51b);
  write_trajectory(args.out, simulate(pop, sim));
  return 0;
}

struct GridArgs {
  std::string out = "grid.csv", config;
  std::uint64_t seed = 0;
  bool minority = false;
};

int run_grid(const CLI::App& cmd, const GridArgs& args) {
  RunConfig run;
  merge_config(cmd, args.config, run,
               {{"--mean-step", "mean_step"},
                {"--f-step", "f_step"},
                {"--population", "population"},
                {"--periods", "periods"},
                {"--replications", "replications"},
                {"--workers", "workers"}});
  GridConfig grid = GridConfig::paper_defaults(args.seed, args.minority);
  grid.mean_grid = GridConfig::steps(0.0, 4.0, run.get_double("mean_step"));
  grid.f_grid = GridConfig::steps(-2.0, 2.0, run.get_double("f_step"));
  grid.population = run.get_int("population");
  grid.periods = run.get_int("periods");
  grid.replications = run.get_int("replications");
  write_grid(args.out, grid_run(grid, run.get_int("workers")));
  return 0;
}

struct FitArgs {
  std::string model = "pbsi", data, out = ".", config;
  std::uint64_t seed = 0;
  double lo = 0.05, hi = 0.95;
  bool save_loglik = false;
};

int run_fit(const CLI::App& cmd, const FitArgs& args) {
  RunConfig run;
  merge_config(cmd, args.config, run,
               {{"--model", "model"},
                {"--chains", "chains"},
                {"--warmup", "warmup"},
                {"--draws", "draws"},
                {"--workers", "workers"}});
  const auto observations = parse_choices(args.data);
  HmcConfig cfg;
  cfg.chains = run.get_int("chains");
  cfg.warmup = run.get_int("warmup");
  cfg.draws = run.get_int("draws");
  cfg.seed = args.seed;
  cfg.workers = run.get_int("workers");
  const auto spec = ModelSpec::make(variant_from_string(run.get("model")));
  const Posterior post = hmc_fit(spec, observations, cfg);

  write_posterior(join_path(args.out, "posterior.csv"), post);
  write_summary(join_path(args.out, "summary.csv"), summarize(post, args.lo, args.hi),
                args.lo, args.hi);
  write_waic(join_path(args.out, "waic.csv"), waic(post.loglik));
  if (args.save_loglik) write_loglik(join_path(args.out, "loglik.csv"), post.loglik);
  write_fit_tables(args.out, post, observations);
  if (!post.raw.diagnostics.reliable)
    std::fprintf(stderr, "warning: divergence rate above 10%%; results unreliable\n");
  double max_rhat = 0.0;
  for (double r : post.raw.diagnostics.rhat) max_rhat = std::max(max_rhat, r);
  std::fprintf(stderr, "fit: %d divergences, max R-hat %.3f\n",
               post.raw.diagnostics.divergences, max_rhat);
  return 0;
}

int run_waic(const std::string& loglik_path, const std::string& out) {
  const CsvTable table = read_csv(loglik_path);
  std::vector<std::vector<double>> loglik(table.rows.size());
  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    loglik[s].reserve(table.rows[s].size());
    for (std::size_t m = 0; m < table.rows[s].size(); ++m)
      loglik[s].push_back(parse_double_field(table, s, m));
  }
  write_waic(out, waic(loglik));
  return 0;
}

int run_summarize(const std::string& posterior_path, const std::string& out, double lo,
                  double hi) {
  const CsvTable table = read_csv(posterior_path);
  if (table.header != std::vector<std::string>{"draw", "chain", "parameter", "value"})
    throw std::runtime_error("summarize: unexpected posterior.csv header");
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> columns;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& name = table.rows[r][2];
    auto [it, inserted] = columns.try_emplace(name);
    if (inserted) order.push_back(name);
    it->second.push_back(parse_double_field(table, r, 3));
  }
  std::vector<SummaryRow> rows;
  for (const auto& name : order) {
    const auto& column = columns[name];
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= static_cast<double>(column.size());
    rows.push_back({name, mean, quantile(column, lo), quantile(column, hi)});
  }
  write_summary(out, rows, lo, hi);
  return 0;
}

struct RecoverArgs {
  std::string model = "pbsi", out = "recovery.csv", config;
  std::uint64_t seed = 0;
  double f_reward = 0.0, f_punish = 0.0;
};

int run_recover(const CLI::App& cmd, const RecoverArgs& args) {
  RunConfig run;
  merge_config(cmd, args.config, run,
               {{"--model", "model"},
                {"--individuals", "individuals"},
                {"--decisions", "decisions"},
                {"--chains", "chains"},
                {"--warmup", "warmup"},
                {"--draws", "draws"},
                {"--workers", "workers"}});
  PopulationSpec pop;
  pop.f_effect_reward = args.f_reward;
  pop.f_effect_punish = args.f_punish;
  SyntheticDesign design;
  design.individuals = run.get_int("individuals");
  design.decisions_per_task = run.get_int("decisions");
  HmcConfig cfg;
  cfg.chains = run.get_int("chains");
  cfg.warmup = run.get_int("warmup");
  cfg.draws = run.get_int("draws");
  cfg.seed = args.seed;
  cfg.workers = run.get_int("workers");
  const auto report = recover(pop, design, variant_from_string(run.get("model")), cfg,
                              derive_seed(args.seed, /*stream=*/0xda7a));
  CsvTable table;
  table.header = {"parameter", "generating", "posterior_mean", "bias",
                  "ci_lo", "ci_hi", "covered"};
  for (const auto& row : report.rows)
    table.rows.push_back({row.name, fmt(row.generating), fmt(row.posterior_mean),
                          fmt(row.bias), fmt(row.ci_lo), fmt(row.ci_hi),
                          row.covered ? "1" : "0"});
  write_csv(args.out, table);
  std::fprintf(stderr, "recover: %d/%d fixed-effect intervals cover, max R-hat %.3f\n",
               report.covered_fixed_effects, report.num_fixed_effects, report.max_rhat);
  return 0;
}

int run_schedule(std::uint64_t seed, const std::string& out) {
  const Schedule schedule = make_schedule(seed);
  if (!validate_schedule(schedule)) throw std::runtime_error("schedule: invalid schedule");
  CsvTable table;
  table.header = {"subject", "phase2_comparison"};
  for (int s = 0; s < schedule.num_subjects; ++s)
    table.rows.push_back({std::to_string(s),
                          std::to_string(schedule.phase2[static_cast<std::size_t>(s)])});
  write_csv(out, table);
  return 0;
}

struct CurveArgs {
  std::string out = "curve.csv";
  double lambda = 1.0, f = 1.0, phi = 1.0, delta_param = 0.0, delta_pref = 0.0;
  int points = 101;
};

int run_curve(const CurveArgs& args) {
  if (args.points < 2) throw std::runtime_error("curve: need at least 2 points");
  const AgentParams params{args.lambda, args.f, args.phi, args.delta_param};
  const std::array<double, 2> nu{args.delta_pref / 2.0, -args.delta_pref / 2.0};
  std::vector<double> s_grid;
  const bool clip = args.f < 0.0;  // response undefined at the endpoints
  for (int i = 0; i < args.points; ++i) {
    double s = static_cast<double>(i) / (args.points - 1);
    if (clip) s = std::min(1.0 - 1e-9, std::max(1e-9, s));
    s_grid.push_back(s);
  }
  const auto probs = response_curve(params, nu, s_grid);
  CsvTable table;
  table.header = {"share", "prob_preferred"};
  for (std::size_t i = 0; i < s_grid.size(); ++i)
    table.rows.push_back({fmt(s_grid[i]), fmt(probs[i])});
  write_csv(args.out, table);
  return 0;
}

struct GenArgs {
  std::string out = "choices.csv", config;
  std::uint64_t seed = 0;
  double f_reward = 0.0, f_punish = 0.0;
};

int run_gen(const CLI::App& cmd, const GenArgs& args) {
  RunConfig run;
  merge_config(cmd, args.config, run,
               {{"--individuals", "individuals"}, {"--decisions", "decisions"}});
  PopulationSpec pop;
  pop.f_effect_reward = args.f_reward;
  pop.f_effect_punish = args.f_punish;
  SyntheticDesign design;
  design.individuals = run.get_int("individuals");
  design.decisions_per_task = run.get_int("decisions");
  const auto rows = generate_synthetic(pop, design, args.seed);
  write_choices(args.out, rows);
  return 0;
}

int run_deltas(const std::string& sliders_path, const std::string& out) {
  const auto records = parse_sliders(sliders_path);
  const auto rows = deltas_from_sliders(records);
  write_deltas(out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-biased social-learning choice model"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate population choice dynamics");
  sim->add_option("--seed", sim_args.seed, "Master seed")->required();
  sim->add_option("--out", sim_args.out, "Output path (trajectory.csv)");
  sim->add_option("--config", sim_args.config, "key = value config file");
  sim->add_option("--periods", "Number of periods");
  sim->add_option("--population", "Population size");
  sim->add_option("--sample-size", "Peers observed per period");
  sim->add_option("--mean-pref", sim_args.mean_pref, "Mean intrinsic preference");
  sim->add_option("--lambda", sim_args.lambda, "Preference weight");
  sim->add_option("--f", sim_args.f, "Social-learning exponent");
  sim->add_option("--phi", sim_args.phi, "Prior strength");
  sim->add_option("--delta", sim_args.delta, "Preference bias");

  GridArgs grid_args;
  auto* grid = app.add_subcommand("grid", "Parameter-grid dynamics sweep");
  grid->add_option("--seed", grid_args.seed, "Master seed")->required();
  grid->add_option("--out", grid_args.out, "Output path (grid.csv)");
  grid->add_option("--config", grid_args.config, "key = value config file");
  grid->add_flag("--minority", grid_args.minority, "Committed-minority variant");
  grid->add_option("--mean-step", "Mean-preference grid step");
  grid->add_option("--f-step", "f grid step");
  grid->add_option("--population", "Population size");
  grid->add_option("--periods", "Periods per run");
  grid->add_option("--replications", "Replications per cell");
  grid->add_option("--workers", "Worker threads");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a model variant to choices.csv");
  fit->add_option("--data", fit_args.data, "choices.csv path")->required();
  fit->add_option("--seed", fit_args.seed, "Master seed")->required();
  fit->add_option("--out", fit_args.out, "Output directory");
  fit->add_option("--config", fit_args.config, "key = value config file");
  fit->add_option("--model", "Model variant (pbsi|psi|p|si)");
  fit->add_option("--chains", "HMC chains");
  fit->add_option("--warmup", "Warmup iterations per chain");
  fit->add_option("--draws", "Kept draws per chain");
  fit->add_option("--workers", "Worker threads");
  fit->add_option("--ci-lo", fit_args.lo, "Lower interval percentile");
  fit->add_option("--ci-hi", fit_args.hi, "Upper interval percentile");
  fit->add_flag("--save-loglik", fit_args.save_loglik,
                "Also write the pointwise log-likelihood matrix (loglik.csv)");

  std::string waic_loglik, waic_out = "waic.csv";
  auto* waic_cmd = app.add_subcommand("waic", "Model comparison from loglik.csv");
  waic_cmd->add_option("--loglik", waic_loglik, "loglik.csv path")->required();
  waic_cmd->add_option("--out", waic_out, "Output path (waic.csv)");

  std::string sum_posterior, sum_out = "summary.csv";
  double sum_lo = 0.05, sum_hi = 0.95;
  auto* sum = app.add_subcommand("summarize", "Posterior summary from posterior.csv");
  sum->add_option("--posterior", sum_posterior, "posterior.csv path")->required();
  sum->add_option("--out", sum_out, "Output path (summary.csv)");
  sum->add_option("--ci-lo", sum_lo, "Lower interval percentile");
  sum->add_option("--ci-hi", sum_hi, "Upper interval percentile");

  RecoverArgs rec_args;
  auto* rec = app.add_subcommand("recover", "Synthetic-data parameter recovery");
  rec->add_option("--seed", rec_args.seed, "Master seed")->required();
  rec->add_option("--out", rec_args.out, "Output path (recovery.csv)");
  rec->add_option("--config", rec_args.config, "key = value config file");
  rec->add_option("--model", "Model variant (pbsi|psi|p|si)");
  rec->add_option("--individuals", "Individuals");
  rec->add_option("--decisions", "Decisions per task");
  rec->add_option("--chains", "HMC chains");
  rec->add_option("--warmup", "Warmup iterations per chain");
  rec->add_option("--draws", "Kept draws per chain");
  rec->add_option("--workers", "Worker threads");
  rec->add_option("--f-reward", rec_args.f_reward, "Generating reward effect on f");
  rec->add_option("--f-punish", rec_args.f_punish, "Generating punish effect on f");

  std::uint64_t sched_seed = 0;
  std::string sched_out = "sched.csv";
  auto* sched = app.add_subcommand("schedule", "Phase assignment for a 6-subject group");
  sched->add_option("--seed", sched_seed, "Master seed")->required();
  sched->add_option("--out", sched_out, "Output path (sched.csv)");

  CurveArgs curve_args;
  auto* curve = app.add_subcommand("curve", "Response curve P(choose preferred | share)");
  curve->add_option("--lambda", curve_args.lambda, "Preference weight");
  curve->add_option("--f", curve_args.f, "Social-learning exponent");
  curve->add_option("--phi", curve_args.phi, "Prior strength");
  curve->add_option("--delta", curve_args.delta_param, "Preference bias");
  curve->add_option("--delta-pref", curve_args.delta_pref, "Preference strength");
  curve->add_option("--points", curve_args.points, "Grid points");
  curve->add_option("--out", curve_args.out, "Output path (curve.csv)");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic choices.csv");
  gen->add_option("--seed", gen_args.seed, "Master seed")->required();
  gen->add_option("--out", gen_args.out, "Output path (choices.csv)");
  gen->add_option("--config", gen_args.config, "key = value config file");
  gen->add_option("--individuals", "Individuals");
  gen->add_option("--decisions", "Decisions per task");
  gen->add_option("--f-reward", gen_args.f_reward, "Reward-treatment effect on f");
  gen->add_option("--f-punish", gen_args.f_punish, "Punish-treatment effect on f");

  std::string deltas_sliders, deltas_out = "deltas.csv";
  auto* deltas = app.add_subcommand("deltas", "Pairwise preference estimates from sliders.csv");
  deltas->add_option("--sliders", deltas_sliders, "sliders.csv path")->required();
  deltas->add_option("--out", deltas_out, "Output path (deltas.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(*sim, sim_args);
    if (grid->parsed()) return run_grid(*grid, grid_args);
    if (fit->parsed()) return run_fit(*fit, fit_args);
    if (waic_cmd->parsed()) return run_waic(waic_loglik, waic_out);
    if (sum->parsed()) return run_summarize(sum_posterior, sum_out, sum_lo, sum_hi);
    if (rec->parsed()) return run_recover(*rec, rec_args);
    if (sched->parsed()) return run_schedule(sched_seed, sched_out);
    if (curve->parsed()) return run_curve(curve_args);
    if (gen->parsed()) return run_gen(*gen, gen_args);
    if (deltas->parsed()) return run_deltas(deltas_sliders, deltas_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
