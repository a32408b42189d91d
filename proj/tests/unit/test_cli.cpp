#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "som/cli/commands.hpp"

using som::cli::run_cli;
namespace fs = std::filesystem;

namespace {

const std::string kConfig = std::string(SOM_SOURCE_DIR) + "/configs/ablation_g08a.yaml";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("som_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("cli: usage and config errors map to exit codes") {
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"bogus"}) == 1);
  CHECK(run_cli({"validate-config", "--config", "/nonexistent/match.yaml", "--log-level", "off"}) == 2);
  CHECK(run_cli({"validate-config", "--config", kConfig, "--log-level", "off"}) == 0);
}

TEST_CASE("cli: export, frozen import, export again gives identical archives") {
  ::setenv("SOURCE_DATE_EPOCH", "0", 1);
  const auto first = scratch("export");
  REQUIRE(run_cli({"export-model", "--config", kConfig, "--out", first.string(), "--agent", "som", "--log-level",
                   "off"}) == 0);
  const auto archive = first / "som.somm";
  REQUIRE(fs::exists(archive));

  const auto second = scratch("import");
  CHECK(run_cli({"import-model", "--config", kConfig, "--out", second.string(), "--agent", "som", "--archive",
                 archive.string(), "--freeze-eval", "--log-level", "off"}) == 0);
  CHECK(slurp(second / "som.somm") == slurp(archive));
  CHECK(fs::exists(second / "report.json"));
  ::unsetenv("SOURCE_DATE_EPOCH");
  fs::remove_all(first.parent_path());
}

TEST_CASE("cli: a corrupt archive is rejected") {
  const auto dir = scratch("corrupt");
  fs::create_directories(dir);
  const auto bad = dir / "bad.somm";
  std::ofstream(bad) << "SOMMODEL 1\n{\"graph\": 3}\n";
  CHECK(run_cli({"import-model", "--config", kConfig, "--out", (dir / "out").string(), "--agent", "som", "--archive",
                 bad.string(), "--log-level", "off"}) == 5);
  fs::remove_all(dir.parent_path());
}

TEST_CASE("cli: report re-renders from report.json") {
  const auto out = scratch("report");
  REQUIRE(run_cli({"run", "--config", kConfig, "--out", out.string(), "--log-level", "off"}) == 0);
  const auto before = slurp(out / "report.txt");
  fs::remove(out / "report.txt");
  CHECK(run_cli({"report", "--out", out.string(), "--log-level", "off"}) == 0);
  CHECK(slurp(out / "report.txt") == before);
  fs::remove_all(out.parent_path());
}
