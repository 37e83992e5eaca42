// Command-line front end: run simulations, tau sweeps, covering designs,
// offline replay, synthetic log generation, and environment inspection.
//
// Exit codes: 0 success, 1 validation error (message names the offending
// field), 2 runtime error.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bandsim/harness.hpp"
#include "bandsim/io.hpp"
#include "bandsim/replay.hpp"

namespace {

struct EnvFlags {
  std::string config_path;
  std::string kind;
  std::optional<int> K, M, N, L;
  std::optional<double> delta, epsilon, sigma;
  std::string noise, arrivals, rates, mu;
  std::optional<std::uint64_t> env_seed;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--env", kind, "environment kind: spike|borda|latent|explicit");
    app->add_option("--K", K, "number of contexts");
    app->add_option("--M", M, "number of messages");
    app->add_option("--N", N, "users per timeslot");
    app->add_option("--L", L, "number of content types (latent)");
    app->add_option("--delta", delta, "payoff grid step");
    app->add_option("--epsilon", epsilon, "spike off-diagonal payoff");
    app->add_option("--noise", noise, "reward noise: bernoulli|truncated-additive");
    app->add_option("--sigma", sigma, "noise scale for truncated-additive");
    app->add_option("--arrivals", arrivals,
                    "arrival process: uniform|categorical|cycle|single-user-iid");
    app->add_option("--rates", rates, "comma-separated arrival rates (categorical)");
    app->add_option("--mu", mu, "explicit payoff matrix, rows separated by ';'");
    app->add_option("--env-seed", env_seed, "structure seed for generated environments");
  }

  std::map<std::string, std::string> file_kv() const {
    if (config_path.empty()) return {};
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("config: cannot read '" + config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return bandsim::detail::parse_kv(ss.str());
  }

  // Config file first, then flags override individual keys. Run configs may
  // prefix environment keys with "env."; bare keys work too.
  bandsim::EnvSpec resolve() const {
    std::map<std::string, std::string> kv = file_kv();
    for (const auto& [k, v] : std::map<std::string, std::string>(kv))
      if (k.rfind("env.", 0) == 0) kv[k.substr(4)] = v;
    if (!kind.empty()) kv["kind"] = kind;
    if (K) kv["K"] = std::to_string(*K);
    if (M) kv["M"] = std::to_string(*M);
    if (N) kv["N"] = std::to_string(*N);
    if (L) kv["L"] = std::to_string(*L);
    if (delta) kv["delta"] = bandsim::format_double(*delta);
    if (epsilon) kv["epsilon"] = bandsim::format_double(*epsilon);
    if (!noise.empty()) kv["noise"] = noise;
    if (sigma) kv["sigma"] = bandsim::format_double(*sigma);
    if (!arrivals.empty()) kv["arrivals"] = arrivals;
    if (!rates.empty()) kv["rates"] = rates;
    if (!mu.empty()) kv["mu"] = mu;
    if (env_seed) kv["seed"] = std::to_string(*env_seed);
    return bandsim::env_spec_from_kv(kv);
  }

  bool has_env() const { return !kind.empty() || !config_path.empty(); }
};

struct RunFlags {
  std::string policy;
  std::optional<std::int64_t> horizon, record_every;
  std::optional<int> tau, fixed_message;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta_lower, nu_lower, exploration_cap;

  void add_to(CLI::App* app) {
    app->add_option("--policy", policy,
                    "alg1|alg2|alg3|oracle|context-free|per-context|random|fixed");
    app->add_option("--T", horizon, "number of timeslots");
    app->add_option("--tau", tau, "broadcast transmissions per timeslot");
    app->add_option("--seed", seed, "run seed (arrivals, rewards, grouping)");
    app->add_option("--record-every", record_every, "time-series stride");
    app->add_option("--delta-lower", delta_lower, "known payoff gap lower bound");
    app->add_option("--nu-lower", nu_lower, "known arrival rate lower bound");
    app->add_option("--exploration-cap", exploration_cap,
                    "exploration budget cap as a fraction of T");
    app->add_option("--message", fixed_message, "1-based message id for policy=fixed");
  }

  void apply_flags(bandsim::RunConfig& cfg) const {
    if (!policy.empty()) cfg.policy.name = policy;
    if (horizon) cfg.horizon = *horizon;
    if (tau) cfg.tau = *tau;
    if (seed) cfg.seed = *seed;
    if (record_every) cfg.record_every = *record_every;
    if (delta_lower) cfg.delta_lower = *delta_lower;
    if (nu_lower) cfg.nu_lower = *nu_lower;
    if (exploration_cap) cfg.exploration_cap = *exploration_cap;
    if (fixed_message) cfg.policy.fixed_message = *fixed_message - 1;
  }

  bandsim::RunConfig resolve(const EnvFlags& env_flags) const {
    bandsim::RunConfig cfg;
    cfg.env = env_flags.resolve();
    const auto kv = env_flags.file_kv();
    auto get = [&](const char* key) -> const std::string* {
      const auto it = kv.find(key);
      return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("policy")) cfg.policy.name = *v;
    if (const auto* v = get("T")) cfg.horizon = bandsim::detail::parse_int("T", *v);
    if (const auto* v = get("tau"))
      cfg.tau = static_cast<int>(bandsim::detail::parse_int("tau", *v));
    if (const auto* v = get("run_seed"))
      cfg.seed = bandsim::detail::parse_u64("run_seed", *v);
    if (const auto* v = get("record_every"))
      cfg.record_every = bandsim::detail::parse_int("record_every", *v);
    if (const auto* v = get("delta_lower"))
      cfg.delta_lower = bandsim::detail::parse_double("delta_lower", *v);
    if (const auto* v = get("nu_lower"))
      cfg.nu_lower = bandsim::detail::parse_double("nu_lower", *v);
    if (const auto* v = get("exploration_cap"))
      cfg.exploration_cap = bandsim::detail::parse_double("exploration_cap", *v);
    if (const auto* v = get("fixed_message"))
      cfg.policy.fixed_message =
          static_cast<int>(bandsim::detail::parse_int("fixed_message", *v)) - 1;
    apply_flags(cfg);
    return cfg;
  }
};

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    bandsim::write_file(out_path, text);
}

struct CliState {
  EnvFlags run_env;
  RunFlags run_flags;
  std::string run_out, run_format = "json";

  EnvFlags sweep_env;
  RunFlags sweep_flags;
  std::string sweep_taus, sweep_seeds, sweep_out, sweep_format = "json";

  int cover_m = 0, cover_k = 0, cover_budget = 200;
  std::uint64_t cover_seed = 0;
  std::string cover_out;

  EnvFlags replay_env;
  RunFlags replay_flags;
  std::string replay_log, replay_out;

  EnvFlags genlog_env;
  std::int64_t genlog_records = 0;
  std::uint64_t genlog_seed = 0;
  std::string genlog_out;

  EnvFlags inspect_env;
  std::string inspect_out;
};

void do_run(CliState& st) {
  const bandsim::RunConfig cfg = st.run_flags.resolve(st.run_env);
  const bandsim::RunResult result = bandsim::run(cfg);
  if (st.run_format == "json") {
    emit_text(bandsim::run_summary_json(result).dump(2) + "\n", st.run_out);
  } else if (st.run_format == "csv") {
    std::ostringstream os;
    bandsim::write_run_csv(os, result);
    emit_text(os.str(), st.run_out);
  } else {
    throw std::invalid_argument("format: must be json or csv");
  }
}

void do_sweep(CliState& st) {
  bandsim::SweepConfig cfg;
  cfg.base = st.sweep_flags.resolve(st.sweep_env);
  for (double d : bandsim::detail::parse_double_list("tau_values", st.sweep_taus))
    cfg.tau_values.push_back(static_cast<int>(d));
  for (double d : bandsim::detail::parse_double_list("seeds", st.sweep_seeds))
    cfg.seeds.push_back(static_cast<std::uint64_t>(d));
  const bandsim::SweepResult result = bandsim::sweep(cfg);
  if (st.sweep_format == "json") {
    emit_text(
        bandsim::sweep_json(result, cfg.base, cfg.tau_values, cfg.seeds).dump(2) + "\n",
        st.sweep_out);
  } else if (st.sweep_format == "csv") {
    std::ostringstream os;
    bandsim::write_sweep_csv(os, result);
    emit_text(os.str(), st.sweep_out);
  } else {
    throw std::invalid_argument("format: must be json or csv");
  }
}

void do_cover(CliState& st) {
  const auto sol =
      bandsim::find_cover(st.cover_m, st.cover_k, st.cover_budget, st.cover_seed);
  emit_text(bandsim::to_json(sol).dump(2) + "\n", st.cover_out);
}

void do_replay(CliState& st) {
  std::ifstream in(st.replay_log);
  if (!in) throw std::runtime_error("log: cannot read '" + st.replay_log + "'");
  const auto log = bandsim::read_log_jsonl(in);
  if (log.empty()) throw std::invalid_argument("log: no records");

  const bool have_env = st.replay_env.has_env();
  bandsim::RunConfig cfg;
  if (have_env)
    cfg = st.replay_flags.resolve(st.replay_env);
  else
    st.replay_flags.apply_flags(cfg);
  int k_count = 0, m_count = 0;
  bandsim::PayoffModel payoff;
  if (have_env) {
    const auto env = bandsim::build_environment(cfg.env, cfg.seed);
    payoff = env.payoff;
    k_count = env.num_contexts();
    m_count = env.num_messages();
  } else {
    for (const auto& rec : log) {
      k_count = std::max(k_count, rec.context_id + 1);
      for (int c : rec.candidate_set) m_count = std::max(m_count, c + 1);
    }
  }
  if (cfg.policy.name == "oracle" && !have_env)
    throw std::invalid_argument(
        "policy: oracle replay needs an environment (--env/--config)");

  bandsim::PolicyConfig pc;
  pc.horizon = static_cast<std::int64_t>(log.size());
  pc.delta_lower = cfg.delta_lower.value_or(have_env ? payoff.grid_step : 1.0);
  pc.nu_lower = cfg.nu_lower.value_or(1.0 / k_count);
  pc.group_size = 1;
  pc.exploration_cap = cfg.exploration_cap;
  pc.structure_seed = cfg.env.seed;
  bandsim::PolicySpec spec = cfg.policy;
  spec.random_seed = cfg.seed;
  auto policy =
      bandsim::make_policy(spec, pc, k_count, m_count, have_env ? &payoff : nullptr);
  const auto summary = bandsim::replay(*policy, log);
  nlohmann::json j = bandsim::to_json(summary);
  j["policy"] = spec.name;
  j["log"] = st.replay_log;
  emit_text(j.dump(2) + "\n", st.replay_out);
}

void do_genlog(CliState& st) {
  const bandsim::EnvSpec spec = st.genlog_env.resolve();
  bandsim::EnvironmentInstance env = bandsim::build_environment(spec, st.genlog_seed);
  const auto log = bandsim::generate_log(env, st.genlog_records, st.genlog_seed);
  std::ostringstream os;
  bandsim::write_log_jsonl(os, log);
  bandsim::write_file(st.genlog_out, os.str());
}

void do_inspect(CliState& st) {
  const bandsim::EnvSpec spec = st.inspect_env.resolve();
  bandsim::EnvironmentInstance env = bandsim::build_environment(spec, spec.seed);
  nlohmann::json j;
  j["config"] = bandsim::to_json(spec);
  nlohmann::json mu = nlohmann::json::array();
  for (int k = 0; k < env.num_contexts(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int m = 0; m < env.num_messages(); ++m) row.push_back(env.payoff.value(k, m));
    mu.push_back(std::move(row));
  }
  j["mu"] = std::move(mu);
  j["grid_step"] = env.payoff.grid_step;
  j["grid_exempt"] = env.payoff.grid_exempt;
  j["content_types"] = bandsim::to_json(bandsim::recover_types_exact(env.payoff));
  nlohmann::json best = nlohmann::json::array();
  for (int k = 0; k < env.num_contexts(); ++k) {
    const int ctx[1] = {k};
    const int users[1] = {0};
    double value = 0.0;
    best.push_back(bandsim::oracle_message(env.payoff, ctx, users, &value) + 1);
  }
  j["per_context_best"] = std::move(best);
  emit_text(j.dump(2) + "\n", st.inspect_out);
}

void setup(CLI::App& app, CliState& st) {
  auto* run_cmd = app.add_subcommand("run", "simulate one policy for T timeslots");
  st.run_env.add_to(run_cmd);
  st.run_flags.add_to(run_cmd);
  run_cmd->add_option("--out", st.run_out, "output path (default: stdout)");
  run_cmd->add_option("--format", st.run_format, "json summary or csv time series");
  run_cmd->callback([&st] { do_run(st); });

  auto* sweep_cmd =
      app.add_subcommand("sweep", "regret vs transmissions over a (tau, seed) grid");
  st.sweep_env.add_to(sweep_cmd);
  st.sweep_flags.add_to(sweep_cmd);
  sweep_cmd->add_option("--tau-values", st.sweep_taus, "comma-separated tau list")
      ->required();
  sweep_cmd->add_option("--seeds", st.sweep_seeds, "comma-separated seed list")
      ->required();
  sweep_cmd->add_option("--out", st.sweep_out, "output path (default: stdout)");
  sweep_cmd->add_option("--format", st.sweep_format, "json full result or csv table");
  sweep_cmd->callback([&st] { do_sweep(st); });

  auto* cover_cmd =
      app.add_subcommand("cover", "pair-covering subsets for M messages, K contexts");
  cover_cmd->add_option("--messages", st.cover_m, "number of messages")->required();
  cover_cmd->add_option("--contexts", st.cover_k, "number of contexts")->required();
  cover_cmd->add_option("--budget", st.cover_budget, "randomized restarts per size");
  cover_cmd->add_option("--seed", st.cover_seed, "restart seed");
  cover_cmd->add_option("--out", st.cover_out, "output path (default: stdout)");
  cover_cmd->callback([&st] { do_cover(st); });

  auto* replay_cmd =
      app.add_subcommand("replay", "offline policy evaluation on a logged dataset");
  replay_cmd->add_option("--log", st.replay_log, "JSON-lines log file")->required();
  st.replay_env.add_to(replay_cmd);
  st.replay_flags.add_to(replay_cmd);
  replay_cmd->add_option("--out", st.replay_out, "output path (default: stdout)");
  replay_cmd->callback([&st] { do_replay(st); });

  auto* genlog_cmd =
      app.add_subcommand("gen-log", "generate a uniform-logging synthetic dataset");
  st.genlog_env.add_to(genlog_cmd);
  genlog_cmd->add_option("--records", st.genlog_records, "number of records")
      ->required();
  genlog_cmd->add_option("--seed", st.genlog_seed, "log generation seed");
  genlog_cmd->add_option("--out", st.genlog_out, "output path")->required();
  genlog_cmd->callback([&st] { do_genlog(st); });

  auto* inspect_cmd =
      app.add_subcommand("inspect", "show an environment's payoffs and content types");
  st.inspect_env.add_to(inspect_cmd);
  inspect_cmd->add_option("--out", st.inspect_out, "output path (default: stdout)");
  inspect_cmd->callback([&st] { do_inspect(st); });

  app.require_subcommand(1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"broadcast-constrained bandit simulator"};
  CliState st;
  setup(app, st);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
