#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ratchet/artifacts.hpp"
#include "ratchet/config.hpp"
#include "ratchet/errors.hpp"

using namespace ratchet;
using nlohmann::json;
using ratchet::testing::source_path;

namespace {

json default_tree() { return json::parse(read_file(source_path("configs/default.json"))); }

std::string field_of(const json& tree) {
  try {
    parse_config(tree);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

struct CliResult {
  int code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::filesystem::path log = std::filesystem::temp_directory_path() / "ratchet_cli_test.log";
  int status = std::system((std::string(RATCHET_CLI) + " " + args + " > " + log.string() + " 2>&1").c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
}

std::string write_temp(const std::string& name, const json& tree) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << tree.dump(2);
  return path.string();
}

}  // namespace

TEST(Config, DefaultsLoad) {
  RunConfig cfg = parse_config(default_tree());
  EXPECT_EQ(cfg.grid.nz, 561);
  EXPECT_EQ(cfg.habit.count, 40);
  EXPECT_DOUBLE_EQ(cfg.h_bar(), 8.0);
  EXPECT_EQ(cfg.habit_grid().size(), 40u);
  EXPECT_TRUE(cfg.kernel.U.is_crra());
}

TEST(Config, MissingSigmaNamesTheField) {
  json t = default_tree();
  t["market"].erase("sigma");
  EXPECT_EQ(field_of(t), "market.sigma");
}

TEST(Config, InvalidValuesNameTheField) {
  json t = default_tree();
  t["market"]["mu"] = 0.01;
  EXPECT_EQ(field_of(t), "market.mu");
  t = default_tree();
  t["grid"]["nz"] = 2.5;
  EXPECT_EQ(field_of(t), "grid.nz");
  t = default_tree();
  t["utility"]["U"] = {{"kind", "crra"}, {"gamma", 1.0}};
  EXPECT_FALSE(field_of(t).empty());
  t = default_tree();
  t["sim"]["x0"] = 100.0;
  t["sim"]["h0"] = 20.0;
  EXPECT_EQ(field_of(t), "sim.h0");
  t = default_tree();
  t["scheme"] = "explicit";
  EXPECT_EQ(field_of(t), "scheme");
}

TEST(Config, UnknownKeysAreRejected) {
  json t = default_tree();
  t["grid"]["resolution"] = 3;
  EXPECT_EQ(field_of(t), "grid.resolution");
  t = default_tree();
  t["extra"] = true;
  EXPECT_EQ(field_of(t), "extra");
}

TEST(Config, OverridesApplyInOrder) {
  json t = default_tree();
  apply_override(t, "grid.nz=281");
  apply_override(t, "outputs.directory=runs/a");
  apply_override(t, "grid.nz=141");
  apply_override(t, "utility.U={\"kind\":\"log\"}");
  RunConfig cfg = parse_config(t);
  EXPECT_EQ(cfg.grid.nz, 141);
  EXPECT_EQ(cfg.outputs.directory, "runs/a");
  EXPECT_EQ(cfg.kernel.U.kind(), "log");
  EXPECT_THROW(apply_override(t, "no_equals_sign"), ConfigError);
  EXPECT_THROW(apply_override(t, "market.r.x=1"), ConfigError);
}

TEST(Config, ResolvedTreeRoundTrips) {
  RunConfig cfg = parse_config(default_tree());
  json once = to_json(cfg);
  EXPECT_EQ(to_json(parse_config(once)), once);
  EXPECT_EQ(config_hash(once), config_hash(to_json(parse_config(once))));
}

TEST(Config, CapMultiplierExtendsTheHabitGrid) {
  json t = default_tree();
  t["grid"]["habit"]["cap_multiplier"] = 2.0;
  RunConfig cfg = parse_config(t);
  auto h = cfg.habit_grid();
  EXPECT_GT(h.size(), 40u);
  EXPECT_DOUBLE_EQ(h.back(), 16.0);
  EXPECT_DOUBLE_EQ(h[39], 8.0);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GT(h[i], h[i - 1]);
}

TEST(Cli, MissingSigmaExitsWithTwo) {
  json t = default_tree();
  t["market"].erase("sigma");
  CliResult r = run_cli("solve --config " + write_temp("ratchet_no_sigma.json", t));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("market.sigma"), std::string::npos) << r.output;
}

TEST(Cli, BadOverrideAndUnknownVerbExitWithTwo) {
  EXPECT_EQ(run_cli("solve --config " + source_path("configs/default.json") + " --override grid.bogus=1").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("solve").code, 2);
}

TEST(Cli, StageFailureExitsWithThree) {
  // A box too narrow for the habit range fails inside the obstacle stage.
  CliResult r = run_cli("solve --config " + source_path("configs/default.json") +
                        " --override grid.z_min=-1 grid.z_max=1 grid.nz=81 --out " +
                        (std::filesystem::temp_directory_path() / "ratchet_narrow").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("obstacle"), std::string::npos) << r.output;
}

TEST(Cli, AuditOfMissingDirectoryExitsWithTwo) {
  EXPECT_EQ(run_cli("audit " + (std::filesystem::temp_directory_path() / "ratchet_nothing_here").string()).code, 2);
}
