#include <filesystem>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ratchet/artifacts.hpp"
#include "ratchet/audit.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/pipeline.hpp"

using namespace ratchet;
using nlohmann::json;
using ratchet::testing::coarse_config;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

const AuditLine* find_line(const AuditReport& r, const std::string& name) {
  for (const AuditLine& l : r.lines)
    if (l.name == name) return &l;
  return nullptr;
}

class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg = coarse_config({"sim.n_paths=1000", "sim.compare=false", "sim.trace_paths=3"});
    dir = fresh_dir("ratchet_pipeline_a");
    outcome = run_pipeline(cfg, dir.string(), 1);
  }
  static RunConfig cfg;
  static fs::path dir;
  static std::optional<SimulationOutcome> outcome;
};
RunConfig PipelineRun::cfg;
fs::path PipelineRun::dir;
std::optional<SimulationOutcome> PipelineRun::outcome;

}  // namespace

TEST(Csv, RoundTripsSeventeenDigits) {
  CsvTable t({"a", "b"});
  t << 0.1 << std::string("x");
  t.end_row();
  t << 1.0 / 3.0 << -2.5e-300;
  t.end_row();
  CsvData d = parse_csv(t.text());
  ASSERT_EQ(d.rows.size(), 2u);
  EXPECT_EQ(d.rows[1][0], 1.0 / 3.0);
  EXPECT_EQ(d.rows[1][1], -2.5e-300);
  EXPECT_TRUE(std::isnan(d.rows[0][1]));
  EXPECT_EQ(d.column("b"), 1);
  EXPECT_THROW(d.column("c"), DataError);
  t << 1.0;
  EXPECT_THROW(t.end_row(), PreconditionError);
}

TEST(Hash, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(PipelineRun, WritesEveryArtifactWithHeaders) {
  for (const char* name : {artifact::config, artifact::manifest, artifact::w_surface, artifact::boundary,
                           artifact::thresholds, artifact::dual_samples, artifact::policy, artifact::report,
                           artifact::simulation, artifact::trace})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  EXPECT_EQ(parse_csv(read_file(dir / artifact::w_surface)).columns, (std::vector<std::string>{"z", "tau", "h", "w"}));
  EXPECT_EQ(parse_csv(read_file(dir / artifact::boundary)).columns, (std::vector<std::string>{"tau", "h", "z_star"}));
  EXPECT_EQ(parse_csv(read_file(dir / artifact::thresholds)).columns,
            (std::vector<std::string>{"t", "h", "x_L", "x_H", "x_star"}));
  EXPECT_EQ(parse_csv(read_file(dir / artifact::policy)).columns,
            (std::vector<std::string>{"x", "t", "h", "V", "pi", "c", "region"}));
}

TEST_F(PipelineRun, ManifestListsEveryFileWithItsHash) {
  json m = json::parse(read_file(dir / artifact::manifest));
  EXPECT_EQ(m["schema_version"], report_schema_version);
  EXPECT_EQ(m["config_hash"], config_hash(json::parse(read_file(dir / artifact::config))));
  std::size_t listed = 0;
  for (const json& f : m["files"]) {
    EXPECT_EQ(f["sha256"], sha256_hex(read_file(dir / f["name"].get<std::string>())));
    ++listed;
  }
  std::size_t present = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != artifact::manifest) ++present;
  EXPECT_EQ(listed, present);
}

TEST_F(PipelineRun, RerunIsByteIdentical) {
  fs::path again = fresh_dir("ratchet_pipeline_b");
  run_pipeline(cfg, again.string(), 2);
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (name == artifact::manifest) continue;  // carries the same hashes, but also build versions
    EXPECT_EQ(read_file(e.path()), read_file(again / name)) << name;
  }
}

TEST_F(PipelineRun, AuditPasses) {
  AuditReport r = audit_artifacts(dir.string());
  EXPECT_TRUE(r.passed()) << r.text();
  const AuditLine* gap = find_line(r, "boundary.first_step_gap");
  ASSERT_NE(gap, nullptr);
  EXPECT_FALSE(gap->hard);
  json j = r.to_json();
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST_F(PipelineRun, AuditCatchesSeededDefect) {
  fs::path broken = fresh_dir("ratchet_pipeline_defect");
  fs::copy(dir, broken);
  CsvData w = parse_csv(read_file(broken / artifact::w_surface));
  // Lower one contact node (w = 0) by 1e-3.
  std::size_t row = 0;
  while (w.rows[row][3] != 0.0 || w.rows[row][1] == 0.0) ++row;
  CsvTable out(w.columns);
  for (std::size_t i = 0; i < w.rows.size(); ++i) {
    for (std::size_t c = 0; c < w.columns.size(); ++c) out << (i == row && c == 3 ? -1e-3 : w.rows[i][c]);
    out.end_row();
  }
  write_atomic(broken / artifact::w_surface, out.text());
  AuditReport r = audit_artifacts(broken.string());
  EXPECT_FALSE(r.passed());
  const AuditLine* neg = find_line(r, "w.nonnegative");
  ASSERT_NE(neg, nullptr);
  EXPECT_FALSE(neg->pass);
  EXPECT_NEAR(neg->violation, 1e-3, 1e-12);
}

TEST_F(PipelineRun, AuditRejectsMissingArtifacts) {
  fs::path partial = fresh_dir("ratchet_pipeline_partial");
  fs::copy(dir, partial);
  fs::remove(partial / artifact::boundary);
  EXPECT_THROW(audit_artifacts(partial.string()), DataError);
}

TEST_F(PipelineRun, SimulationBracketsTheValue) {
  ASSERT_TRUE(outcome.has_value());
  const SimResult& r = outcome->optimal;
  EXPECT_LE(r.value_estimate, outcome->value + 3.0 * r.std_error);
  EXPECT_GE(r.value_estimate, outcome->value - 3.0 * r.std_error - 5e-3 * std::abs(outcome->value));
  EXPECT_FALSE(outcome->comparison.has_value());
}

TEST(Pipeline, SelectionLimitsTheArtifacts) {
  fs::path d = fresh_dir("ratchet_pipeline_probes");
  run_pipeline(coarse_config({"grid.habit.count=8"}), d.string(), 1, {false, true, false});
  EXPECT_TRUE(fs::exists(d / artifact::policy));
  EXPECT_TRUE(fs::exists(d / artifact::manifest));
  EXPECT_FALSE(fs::exists(d / artifact::w_surface));
  EXPECT_FALSE(fs::exists(d / artifact::simulation));
}

TEST(Pipeline, StageErrorsNameTheStage) {
  try {
    solve(coarse_config({"grid.z_min=-1", "grid.z_max=1", "grid.nz=81"}), 1);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "obstacle");
  }
}
