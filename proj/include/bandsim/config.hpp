#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandsim/env.hpp"
#include "bandsim/policies.hpp"

namespace bandsim {

enum class EnvKind { kSpike, kBorda, kLatent, kExplicit };

// Declarative environment description, loadable from a key = value config
// file or CLI flags. `seed` drives generated structure (latent payoffs),
// while arrival/reward streams are seeded per run.
struct EnvSpec {
  EnvKind kind = EnvKind::kLatent;
  int num_contexts = 1;   // K
  int num_messages = 1;   // M (implied for spike/borda/explicit)
  int group_size = 1;     // N
  int num_types = 1;      // L, latent only
  double delta = 0.2;
  double epsilon = 0.01;  // spike only
  NoiseKind noise = NoiseKind::kBernoulli;
  double sigma = 0.1;     // truncated-additive only
  std::optional<ArrivalKind> arrivals;  // default depends on kind
  std::vector<double> rates;            // iid-categorical only
  std::vector<double> mu;               // explicit only, row-major K x M
  std::uint64_t seed = 0;               // structure seed
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key on line " +
                                  std::to_string(line_no));
    kv[key] = value;
  }
  return kv;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::invalid_argument(key + ": not a number ('" + v + "')");
  }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw std::invalid_argument(key + ": not an integer ('" + v + "')");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw std::invalid_argument(key + ": not a nonnegative integer ('" + v + "')");
  }
}

inline std::vector<double> parse_double_list(const std::string& key,
                                             const std::string& v) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(v);
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(parse_double(key, token));
  }
  return out;
}

// Row-major matrix: rows separated by ';', entries by spaces or commas.
inline std::vector<std::vector<double>> parse_matrix(const std::string& key,
                                                     const std::string& v) {
  std::vector<std::vector<double>> rows;
  std::string row_text;
  std::istringstream in(v);
  while (std::getline(in, row_text, ';')) {
    std::vector<double> row;
    std::istringstream row_in(row_text);
    std::string tok;
    while (row_in >> tok) {
      if (!tok.empty() && tok.back() == ',') tok.pop_back();
      row.push_back(parse_double(key, tok));
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(key + ": empty matrix");
  return rows;
}

}  // namespace detail

inline std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::kSpike: return "spike";
    case EnvKind::kBorda: return "borda";
    case EnvKind::kLatent: return "latent";
    case EnvKind::kExplicit: return "explicit";
  }
  return "?";
}

inline EnvKind env_kind_from_string(const std::string& s) {
  if (s == "spike") return EnvKind::kSpike;
  if (s == "borda") return EnvKind::kBorda;
  if (s == "latent") return EnvKind::kLatent;
  if (s == "explicit") return EnvKind::kExplicit;
  throw std::invalid_argument("kind: must be spike|borda|latent|explicit (got '" + s + "')");
}

inline std::string to_string(ArrivalKind k) {
  switch (k) {
    case ArrivalKind::kIidCategorical: return "categorical";
    case ArrivalKind::kUniform: return "uniform";
    case ArrivalKind::kDeterministicCycle: return "cycle";
    case ArrivalKind::kSingleUserIid: return "single-user-iid";
  }
  return "?";
}

inline ArrivalKind arrival_kind_from_string(const std::string& s) {
  if (s == "categorical" || s == "iid-categorical") return ArrivalKind::kIidCategorical;
  if (s == "uniform") return ArrivalKind::kUniform;
  if (s == "cycle" || s == "deterministic-cycle") return ArrivalKind::kDeterministicCycle;
  if (s == "single-user-iid" || s == "single") return ArrivalKind::kSingleUserIid;
  throw std::invalid_argument(
      "arrivals: must be uniform|categorical|cycle|single-user-iid (got '" + s + "')");
}

inline std::string to_string(NoiseKind k) {
  return k == NoiseKind::kBernoulli ? "bernoulli" : "truncated-additive";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "bernoulli") return NoiseKind::kBernoulli;
  if (s == "truncated-additive") return NoiseKind::kTruncatedAdditive;
  throw std::invalid_argument("noise: must be bernoulli|truncated-additive (got '" + s + "')");
}

// Reads an EnvSpec from parsed key/value pairs; `prefix` selects e.g. "env."
// keys inside a run config.
inline EnvSpec env_spec_from_kv(const std::map<std::string, std::string>& kv,
                                const std::string& prefix = "") {
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(prefix + key);
    return it == kv.end() ? nullptr : &it->second;
  };
  EnvSpec spec;
  const std::string* kind = get("kind");
  if (kind == nullptr) throw std::invalid_argument("kind: required");
  spec.kind = env_kind_from_string(*kind);
  if (const auto* v = get("K")) spec.num_contexts = static_cast<int>(detail::parse_int("K", *v));
  if (const auto* v = get("M")) spec.num_messages = static_cast<int>(detail::parse_int("M", *v));
  if (const auto* v = get("N")) spec.group_size = static_cast<int>(detail::parse_int("N", *v));
  if (const auto* v = get("L")) spec.num_types = static_cast<int>(detail::parse_int("L", *v));
  if (const auto* v = get("delta")) spec.delta = detail::parse_double("delta", *v);
  if (const auto* v = get("epsilon")) spec.epsilon = detail::parse_double("epsilon", *v);
  if (const auto* v = get("noise")) spec.noise = noise_kind_from_string(*v);
  if (const auto* v = get("sigma")) spec.sigma = detail::parse_double("sigma", *v);
  if (const auto* v = get("arrivals")) spec.arrivals = arrival_kind_from_string(*v);
  if (const auto* v = get("rates")) spec.rates = detail::parse_double_list("rates", *v);
  if (const auto* v = get("seed")) spec.seed = detail::parse_u64("seed", *v);
  if (const auto* v = get("mu")) {
    const auto rows = detail::parse_matrix("mu", *v);
    spec.num_contexts = static_cast<int>(rows.size());
    spec.num_messages = static_cast<int>(rows.front().size());
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != spec.num_messages)
        throw std::invalid_argument("mu: rows must have equal length");
      spec.mu.insert(spec.mu.end(), row.begin(), row.end());
    }
  }
  if (spec.kind == EnvKind::kSpike || spec.kind == EnvKind::kBorda)
    spec.num_messages = spec.num_contexts;
  return spec;
}

// Builds the environment: structure from spec.seed, streams from stream_seed.
inline EnvironmentInstance build_environment(const EnvSpec& spec,
                                             std::uint64_t stream_seed) {
  EnvironmentInstance env;
  switch (spec.kind) {
    case EnvKind::kSpike:
      env = make_spike_env(spec.num_contexts, spec.group_size, spec.epsilon,
                           stream_seed);
      break;
    case EnvKind::kBorda:
      if (spec.num_contexts != spec.group_size)
        throw std::invalid_argument("N: borda requires M == K == N");
      env = make_borda_env(spec.num_contexts, spec.group_size, stream_seed);
      break;
    case EnvKind::kLatent: {
      env = make_latent_env(spec.num_contexts, spec.num_messages, spec.num_types,
                            spec.delta, spec.seed, spec.group_size,
                            spec.arrivals.value_or(ArrivalKind::kUniform));
      reseed_streams(env, stream_seed);
      break;
    }
    case EnvKind::kExplicit: {
      if (spec.mu.empty()) throw std::invalid_argument("mu: required for explicit kind");
      PayoffModel p;
      p.num_contexts = spec.num_contexts;
      p.num_messages = spec.num_messages;
      p.grid_step = spec.delta;
      p.mu = spec.mu;
      // The relaxed model allows off-grid payoffs with a known gap bound.
      bool on_grid = true;
      for (double v : p.mu) {
        const double ratio = v / p.grid_step;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
          on_grid = false;
      }
      p.grid_exempt = !on_grid;
      ArrivalProcess a;
      a.kind = spec.arrivals.value_or(ArrivalKind::kUniform);
      a.group_size = spec.group_size;
      a.rates = spec.rates;
      env = make_environment(std::move(p), std::nullopt, std::move(a), stream_seed);
      break;
    }
  }
  env.payoff.noise = spec.noise;
  env.payoff.noise_sigma = spec.noise == NoiseKind::kTruncatedAdditive ? spec.sigma : 0.0;
  if (spec.noise == NoiseKind::kTruncatedAdditive && spec.sigma < 0.0)
    throw std::invalid_argument("sigma: must be >= 0");
  if (spec.kind != EnvKind::kExplicit) {
    if (spec.arrivals) {
      ArrivalProcess a;
      a.kind = *spec.arrivals;
      a.group_size = spec.group_size;
      a.rates = spec.rates;
      validate_arrivals(a, env.num_contexts());
      env.arrivals = std::move(a);
    } else if (!spec.rates.empty()) {
      throw std::invalid_argument("rates: only meaningful with arrivals = categorical");
    }
  }
  return env;
}

// The smallest per-context arrival rate of the process; the default nu_lower.
inline double min_arrival_rate(const EnvironmentInstance& env) {
  const auto& a = env.arrivals;
  if (a.kind == ArrivalKind::kIidCategorical) {
    double lo = a.rates.front();
    for (double r : a.rates) lo = std::min(lo, r);
    return lo;
  }
  return static_cast<double>(a.group_size) / env.num_contexts();
}

inline nlohmann::json to_json(const EnvSpec& spec) {
  nlohmann::json j{
      {"kind", to_string(spec.kind)},
      {"K", spec.num_contexts},
      {"M", spec.num_messages},
      {"N", spec.group_size},
      {"noise", to_string(spec.noise)},
      {"seed", spec.seed},
  };
  if (spec.kind == EnvKind::kLatent) {
    j["L"] = spec.num_types;
    j["delta"] = spec.delta;
  }
  if (spec.kind == EnvKind::kExplicit) j["delta"] = spec.delta;
  if (spec.kind == EnvKind::kSpike) j["epsilon"] = spec.epsilon;
  if (spec.noise == NoiseKind::kTruncatedAdditive) j["sigma"] = spec.sigma;
  if (spec.arrivals) j["arrivals"] = to_string(*spec.arrivals);
  if (!spec.rates.empty()) j["rates"] = spec.rates;
  if (!spec.mu.empty()) j["mu"] = spec.mu;
  return j;
}

}  // namespace bandsim
