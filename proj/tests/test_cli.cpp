#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "limper/cli.hpp"
#include "limper/errors.hpp"
#include "limper/stage_io.hpp"

using namespace limper;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::vector<std::string> argv = {"limper"};
  argv.insert(argv.end(), args.begin(), args.end());
  CliRun r;
  r.code = run_cli(argv, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void dump(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, SpectrumOfFreeOperator) {
  const CliRun r = cli({"spectrum", "--potential", "0"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "band_index,alpha,beta\n0,-2,2\n");
}

TEST(Cli, SpectrumOfPeriodTwo) {
  const CliRun r = cli({"spectrum", "--potential", "4,0"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "band_index,alpha,beta\n0,-0.8284271247461901,0\n1,4,4.82842712474619\n");
}

TEST(Cli, SpectrumWindow) {
  const CliRun r = cli({"spectrum", "--potential", "4,0", "--window", "-0.5,4.5"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "band_index,alpha,beta");
  const std::vector<std::array<double, 2>> expect = {{-0.5, 0.0}, {4.0, 4.5}};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    ASSERT_TRUE(std::getline(lines, row));
    std::istringstream cells(row);
    std::string index, alpha, beta;
    std::getline(cells, index, ',');
    std::getline(cells, alpha, ',');
    std::getline(cells, beta, ',');
    EXPECT_EQ(index, std::to_string(i));
    EXPECT_NEAR(std::stod(alpha), expect[i][0], 1e-9);
    EXPECT_NEAR(std::stod(beta), expect[i][1], 1e-9);
  }
  EXPECT_FALSE(std::getline(lines, row));
}

TEST(Cli, SweepOfFreeOperator) {
  const CliRun r = cli({"lyapunov-sweep", "--potential", "0", "--grid", "-3,3,3"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string header, a, b, c;
  std::getline(lines, header);
  std::getline(lines, a);
  std::getline(lines, b);
  std::getline(lines, c);
  EXPECT_EQ(header, "E,L,in_spectrum");
  EXPECT_EQ(b, "0,0,1");
  const double l = std::stod(a.substr(a.find(',') + 1));
  EXPECT_NEAR(l, std::acosh(1.5), 1e-12);
  EXPECT_EQ(a.substr(0, 3), "-3,");
  EXPECT_EQ(c.back(), '0');
}

TEST(Cli, SweepIsThreadCountIndependent) {
  const std::vector<std::string> base = {"lyapunov-sweep", "--potential", "1.5,-0.25,0.75", "--grid",
                                         "-4,4,101", "--length", "1000"};
  std::vector<std::string> one = base, three = base;
  one.insert(one.end(), {"--threads", "1"});
  three.insert(three.end(), {"--threads", "3"});
  const CliRun a = cli(one), b = cli(three);
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"spectrum"}).code, kExitUsage);
  EXPECT_EQ(cli({"spectrum", "--potential", "/nonexistent/file"}).code, kExitUsage);
  EXPECT_EQ(cli({"lyapunov-sweep", "--potential", "0", "--grid", "0,1,0"}).code, kExitUsage);
  EXPECT_EQ(cli({"construct", "--construction", "c"}).code, kExitUsage);
  EXPECT_EQ(cli({"verify", "/nonexistent/stage.json"}).code, kExitUsage);
}

TEST(Cli, LoadPotentialSources) {
  EXPECT_EQ(load_potential("1,2,3"), PotentialRecipe::from_values({1.0, 2.0, 3.0}));
  const fs::path d = fresh_dir("limper_cli_load");
  dump(d / "values.txt", "0.5\n-0.5\n");
  EXPECT_EQ(load_potential((d / "values.txt").string()), PotentialRecipe::from_values({0.5, -0.5}));
  const PotentialRecipe r = PotentialRecipe::from_values({1.0, 0.0}).with_overlay({2, 1, {0.5}});
  dump(d / "recipe.json", recipe_text(r));
  EXPECT_EQ(load_potential((d / "recipe.json").string()), r);
  dump(d / "bad.txt", "1\nx\n");
  EXPECT_THROW(load_potential((d / "bad.txt").string()), FormatError);
}

TEST(Cli, ConstructVerifyTamperResume) {
  const fs::path d = fresh_dir("limper_cli_b");
  const fs::path cfg = d / "config.txt";
  dump(cfg, "K=1\nthreads=1\n");
  const CliRun c = cli({"construct", "--construction", "b", "--config", cfg.string(), "--outdir", (d / "out").string()});
  ASSERT_EQ(c.code, kExitOk) << c.err << c.out;
  EXPECT_TRUE(fs::exists(d / "out" / "stage_b_0.json"));
  EXPECT_TRUE(fs::exists(d / "out" / "summary.txt"));
  EXPECT_TRUE(fs::exists(d / "out" / "discontinuity.csv"));
  EXPECT_TRUE(fs::exists(d / "out" / "lyapunov_sweep.csv"));
  const fs::path s1 = d / "out" / "stage_b_1.json";
  ASSERT_TRUE(fs::exists(s1));

  const CliRun v = cli({"verify", s1.string()});
  EXPECT_EQ(v.code, kExitOk) << v.out;
  EXPECT_NE(v.out.find("verified"), std::string::npos);

  std::string text = slurp(s1);
  const auto pos = text.rfind("\"e_k\": \"");
  ASSERT_NE(pos, std::string::npos);
  const auto end = text.find('"', pos + 8);
  text.replace(pos + 8, end - pos - 8, "0x1p-1");
  dump(d / "tampered.json", text);
  const CliRun t = cli({"verify", (d / "tampered.json").string()});
  EXPECT_EQ(t.code, kExitVerification);
  EXPECT_NE(t.out.find("FAIL"), std::string::npos);
  EXPECT_NE(t.out.find("digest"), std::string::npos);

  const CliRun r = cli({"construct", "--construction", "b", "--config", cfg.string(), "--resume",
                     (d / "out" / "stage_b_0.json").string(), "--outdir", (d / "resumed").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(d / "resumed" / "stage_b_1.json"), slurp(s1));
}

TEST(Cli, VerifyDetectsMovedInterval) {
  const fs::path d = fresh_dir("limper_cli_a");
  StageFile f;
  f.construction = 'A';
  f.config.threads = 1;
  f.history_a.push_back(initial_stage(5, 0.5, f.config));
  save_stage_file(f, (d / "good.json").string());
  EXPECT_EQ(cli({"verify", (d / "good.json").string()}).code, kExitOk);

  f.history_a[0].sigma.intervals[0].lo += 0.5;
  f.history_a[0].sigma.intervals[0].hi += 0.5;
  save_stage_file(f, (d / "moved.json").string());
  const CliRun bad = cli({"verify", (d / "moved.json").string()});
  EXPECT_EQ(bad.code, kExitVerification);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, ConfigParsing) {
  const ConstructionConfig c = parse_config("# comment\nK=3\nmode=capped\nm0_cap=64\neps=0.5\n");
  EXPECT_EQ(c.stages, 3);
  EXPECT_EQ(c.mode, Mode::Capped);
  EXPECT_EQ(c.m0_cap, 64);
  EXPECT_EQ(c.eps, 0.5);
  EXPECT_EQ(parse_config(config_text(c)), c);
  EXPECT_THROW(parse_config("K=x\n"), FormatError);
  EXPECT_THROW(parse_config("nonsense=1\n"), FormatError);
  EXPECT_THROW(parse_config("mode=loose\n"), FormatError);
  EXPECT_THROW(parse_config("eps=0\n"), FormatError);
}
