#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "bandsim/config.hpp"
#include "bandsim/harness.hpp"
#include "bandsim/io.hpp"
#include "test_util.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const std::string out_path = test_util::temp_path("stdout.txt");
  const std::string err_path = test_util::temp_path("stderr.txt");
  const std::string cmd = std::string(BANDSIM_CLI_PATH) + " " + args + " > " +
                          out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (status >= 0) ? WEXITSTATUS(status) : -1;
  r.out = test_util::slurp(out_path);
  r.err = test_util::slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

}  // namespace

TEST_CASE("run subcommand: oracle summary") {
  const auto r = run_cli(
      "run --env spike --K 4 --N 4 --tau 1 --policy oracle --T 100 --seed 1");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["results"]["learning_regret"] == 0.0);
  CHECK(j["config"]["T"] == 100);
  CHECK(j["config"]["policy"] == "oracle");
  // Defaults are echoed.
  CHECK(j["config"].contains("record_every"));
  CHECK(j["config"].contains("delta_lower"));
  CHECK(j["config"].contains("nu_lower"));
}

TEST_CASE("cover subcommand emits the exact small design") {
  const auto r = run_cli("cover --messages 3 --contexts 3");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["s"] == 2);
  REQUIRE(j["subsets"].size() == 3);
  CHECK(j["subsets"][0] == json::array({1, 2}));
  CHECK(j["subsets"][1] == json::array({1, 3}));
  CHECK(j["subsets"][2] == json::array({2, 3}));
  // Assignment entries carry 1-based pairs and contexts.
  CHECK(j["assignment"][0]["pair"] == json::array({1, 2}));
}

TEST_CASE("validation failures exit 1 and name the field") {
  const auto r = run_cli(
      "run --env spike --K 4 --N 4 --tau 9 --policy oracle --T 10 --seed 1");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("tau") != std::string::npos);

  const auto bad_kind = run_cli("run --env nope --K 2 --N 1 --policy oracle --T 5");
  CHECK(bad_kind.exit_code == 1);
  CHECK(bad_kind.err.find("kind") != std::string::npos);
}

TEST_CASE("unwritable output path exits 2") {
  const auto r = run_cli(
      "run --env spike --K 2 --N 2 --policy oracle --T 5 --seed 1 "
      "--out /nonexistent-dir/x.json");
  CHECK(r.exit_code == 2);
}

TEST_CASE("repeat runs are byte-identical") {
  const std::string args =
      "run --env latent --K 3 --M 5 --L 3 --delta 0.2 --N 2 --env-seed 7 "
      "--policy alg1 --T 3000 --tau 1 --seed 11";
  const auto a = run_cli(args + " --format csv");
  const auto b = run_cli(args + " --format csv");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const auto ja = run_cli(args);
  const auto jb = run_cli(args);
  CHECK(ja.out == jb.out);
  CHECK(!ja.out.empty());
}

TEST_CASE("flags and config file produce identical output") {
  const std::string cfg_path = test_util::temp_path("run_config.txt");
  {
    std::ofstream out(cfg_path);
    out << "# run configuration\n"
        << "env.kind = latent\n"
        << "env.K = 3\n"
        << "env.M = 5\n"
        << "env.L = 3\n"
        << "env.delta = 0.2\n"
        << "env.N = 2\n"
        << "env.seed = 7\n"
        << "policy = alg1\n"
        << "T = 2000\n"
        << "tau = 1\n";
  }
  const auto from_file = run_cli("run --config " + cfg_path + " --seed 4");
  const auto from_flags = run_cli(
      "run --env latent --K 3 --M 5 --L 3 --delta 0.2 --N 2 --env-seed 7 "
      "--policy alg1 --T 2000 --tau 1 --seed 4");
  REQUIRE(from_file.exit_code == 0);
  REQUIRE(from_flags.exit_code == 0);
  CHECK(from_file.out == from_flags.out);
  std::remove(cfg_path.c_str());
}

TEST_CASE("sweep emits the documented csv table") {
  const auto r = run_cli(
      "sweep --env spike --K 4 --N 4 --arrivals cycle --policy oracle --T 50 "
      "--tau-values 1,2,4 --seeds 1,2 --format csv");
  REQUIRE(r.exit_code == 0);
  std::istringstream is(r.out);
  std::string header;
  std::getline(is, header);
  CHECK(header == "tau,mean_R,std_R,mean_B,mean_L");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("gen-log then replay round trip") {
  const std::string log_path = test_util::temp_path("cli_log.jsonl");
  const auto gen = run_cli(
      "gen-log --env latent --K 2 --M 4 --L 2 --delta 0.25 --env-seed 3 "
      "--records 2000 --seed 5 --out " +
      log_path);
  REQUIRE(gen.exit_code == 0);

  const auto rep = run_cli("replay --log " + log_path + " --policy random --seed 9");
  REQUIRE(rep.exit_code == 0);
  const json j = json::parse(rep.out);
  CHECK(j["total_records"] == 2000);
  CHECK(j["matched_rounds"].get<int>() > 0);
  CHECK(j["relative_accuracy"].get<double>() > 0.5);

  const auto orc = run_cli("replay --log " + log_path +
                           " --policy oracle --env latent --K 2 --M 4 --L 2 "
                           "--delta 0.25 --env-seed 3");
  REQUIRE(orc.exit_code == 0);
  const json jo = json::parse(orc.out);
  CHECK(jo["relative_accuracy"].get<double>() >= 1.0);
  std::remove(log_path.c_str());
}

TEST_CASE("inspect reports ground-truth content types") {
  const auto r = run_cli(
      "inspect --env latent --K 2 --M 6 --L 3 --delta 0.2 --env-seed 7");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["content_types"]["types"].size() == 3);
  CHECK(j["mu"].size() == 2);
  CHECK(j["per_context_best"].size() == 2);
}

TEST_CASE("json outputs round trip through the parser") {
  bandsim::RunConfig rc;
  rc.env.kind = bandsim::EnvKind::kBorda;
  rc.env.num_contexts = 4;
  rc.env.num_messages = 4;
  rc.env.group_size = 4;
  rc.policy.name = "oracle";
  rc.horizon = 20;
  const auto res = bandsim::run(rc);
  const json j = bandsim::run_summary_json(res);
  CHECK(json::parse(j.dump()) == j);
  CHECK(json::parse(j.dump(2)) == j);
}

TEST_CASE("empty sweep table emits a header-only csv") {
  bandsim::SweepResult empty;
  std::ostringstream os;
  bandsim::write_sweep_csv(os, empty);
  CHECK(os.str() == "tau,mean_R,std_R,mean_B,mean_L\n");
}

TEST_CASE("config parser errors name the line") {
  CHECK_THROWS_WITH_AS(bandsim::detail::parse_kv("kind latent"),
                       doctest::Contains("line 1"), std::invalid_argument);
  const auto kv = bandsim::detail::parse_kv("kind = latent\nK = 2\nM = x");
  CHECK_THROWS_WITH_AS(bandsim::env_spec_from_kv(kv), doctest::Contains("M"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(bandsim::env_spec_from_kv({{"K", "2"}}),
                       doctest::Contains("kind"), std::invalid_argument);
}
