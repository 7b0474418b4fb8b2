#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <nmfem/nmfem.hpp>

#include "cli.hpp"
#include "output.hpp"

namespace nmfem {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tool(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return cli::read_file(p); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("nmfem_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small two-cluster profile matrix.
  std::string profiles() {
    SimulationSpec spec;
    spec.m = 12;
    spec.n = 60;
    spec.per_individual_trials = 30;
    spec.K = 3;
    spec.H0 = 2;
    spec.alpha = 0.3;
    spec.seed = 4;
    const auto sim = generate(spec);
    std::ofstream(path("profiles.csv")) << [&] {
      std::ostringstream s;
      write_profiles_csv(s, sim.data, "id");
      return s.str();
    }();
    return path("profiles.csv");
  }

  fs::path dir_;
};

TEST_F(Cli, IngestSmallFixtureMatchesHandProfile) {
  std::ofstream(path("events.csv")) << "card_id,timestamp,station_id\n"
                                       "b,2024-03-06T07:10,S2\n"
                                       "a,2024-03-04T08:59,S1\n"
                                       "a,2024-03-05T09:00,S1\n"
                                       "b,2024-03-10T23:59,S2\n"
                                       "a,2024-03-05T18:30,S7\n"
                                       "b,2024-03-06T17:00,S9\n";
  const auto r = tool({"ingest", "--input", path("events.csv"), "--output-dir", path("out"),
                       "--min-active-days", "2"});
  ASSERT_EQ(r.code, 0) << r.err;

  // a: Mon-08, Tue-09, Tue-18; b: Wed-07, Wed-17, Sun-23.
  const auto labels = weekly_bin_labels();
  std::string expected = "card_id";
  for (const auto& l : labels) expected += "," + l;
  expected += "\n";
  auto row = [&](const std::string& key, const std::vector<std::string>& hits) {
    std::string line = key;
    for (const auto& l : labels) {
      line += std::find(hits.begin(), hits.end(), l) != hits.end() ? ",1" : ",0";
    }
    return line + "\n";
  };
  expected += row("a", {"Mon-08", "Tue-09", "Tue-18"});
  expected += row("b", {"Wed-07", "Wed-17", "Sun-23"});
  EXPECT_EQ(slurp(path("out/profiles.csv")), expected);
  EXPECT_EQ(slurp(path("out/home_stations.csv")), "card_id,home_station\na,S1\nb,S2\n");

  const auto again = tool({"ingest", "--input", path("events.csv"), "--output-dir", path("again"),
                           "--min-active-days", "2"});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(slurp(path("again/profiles.csv")), expected);
}

TEST_F(Cli, IngestEmptyFileExitsTwo) {
  std::ofstream(path("empty.csv")).close();
  const auto r = tool({"ingest", "--input", path("empty.csv"), "--output-dir", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no events"), std::string::npos);
}

TEST_F(Cli, MissingInputIsAnIoError) {
  const auto r = tool({"fit", "--input", path("nope.csv"), "--k", "2", "--h", "1",
                       "--output-dir", path("out")});
  EXPECT_EQ(r.code, 6);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(tool({}).code, 1);
  EXPECT_EQ(tool({"frobnicate"}).code, 1);
  EXPECT_EQ(tool({"fit", "--k", "2"}).code, 1);
  EXPECT_EQ(tool({"fit", "--help"}).code, 0);
  const auto input = profiles();
  const auto r = tool({"fit", "--input", input, "--k", "2", "--h", "3", "--output-dir", path("o")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(path("o/model.json")));
  EXPECT_EQ(tool({"fit", "--input", input, "--k", "2", "--h", "1", "--init", "sideways",
                  "--output-dir", path("o")}).code, 1);
  EXPECT_EQ(tool({"fit", "--input", input, "--k", "2", "--h", "1", "--start", "psychic",
                  "--output-dir", path("o")}).code, 1);
}

TEST_F(Cli, KMeansStartMatchesLibrary) {
  const auto input = profiles();
  ASSERT_EQ(tool({"fit", "--input", input, "--k", "3", "--h", "2", "--seed", "5", "--start", "kmeans",
                  "--output-dir", path("km")}).code, 0);
  std::ifstream in(input);
  const auto data = read_profiles_csv(in);
  FitConfig cfg;
  cfg.seed = 5;
  cfg.start = StartStrategy::kKMeans;
  const auto report = nlohmann::json::parse(slurp(path("km/fit_report.json")));
  EXPECT_EQ(report["loglik"].get<double>(), fit(data, 3, 2, cfg).loglik);
}

TEST_F(Cli, FitIsDeterministicAndMatchesLibrary) {
  const auto input = profiles();
  const std::vector<std::string> base = {"fit", "--input", input, "--k", "3", "--h", "2", "--seed", "9"};
  auto first = base;
  first.insert(first.end(), {"--output-dir", path("a")});
  auto second = base;
  second.insert(second.end(), {"--output-dir", path("b"), "--threads", "3"});
  ASSERT_EQ(tool(first).code, 0);
  ASSERT_EQ(tool(second).code, 0);
  for (const char* f : {"model.json", "fit_report.json", "trace.csv"}) {
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
  }

  std::ifstream in(input);
  const auto data = read_profiles_csv(in);
  FitConfig cfg;
  cfg.seed = 9;
  const auto expected = fit(data, 3, 2, cfg);
  const auto model = model_from_json(nlohmann::json::parse(slurp(path("a/model.json"))));
  EXPECT_EQ(model.model.theta(), expected.model.theta());
  EXPECT_EQ(model.feature_labels, data.feature_labels());
  const auto report = nlohmann::json::parse(slurp(path("a/fit_report.json")));
  EXPECT_EQ(report["loglik"].get<double>(), expected.loglik);
  EXPECT_EQ(slurp(path("a/trace.csv")).substr(0, 33), "iteration,loglik,inner_iterations");
}

TEST_F(Cli, RestartsFlagIsReported) {
  const auto input = profiles();
  for (const std::string n : {"1", "5"}) {
    const auto out = path("r" + n);
    ASSERT_EQ(tool({"fit", "--input", input, "--k", "2", "--h", "1", "--restarts", n,
                    "--output-dir", out}).code, 0);
    const auto report = nlohmann::json::parse(slurp(out + "/fit_report.json"));
    EXPECT_EQ(report["restarts_tried"].get<int>(), std::stoi(n));
  }
}

TEST_F(Cli, NonConvergenceExitsThree) {
  const auto r = tool({"fit", "--input", profiles(), "--k", "3", "--h", "2", "--max-iters", "1",
                       "--output-dir", path("o")});
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(fs::exists(path("o/model.json")));
  const auto manifest = nlohmann::json::parse(slurp(path("o/manifest.json")));
  EXPECT_EQ(manifest["exit_code"].get<int>(), 3);
}

TEST_F(Cli, ConfigFileFillsFlagsAndCommandLineWins) {
  const auto input = profiles();
  std::ofstream(path("run.cfg")) << "# fit settings\nk = 3\nh=2\nrestarts=2\nseed=4\nverbose=false\n";
  const auto r = tool({"fit", "--config", path("run.cfg"), "--input", input, "--restarts", "3",
                       "--output-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(path("o/fit_report.json")));
  EXPECT_EQ(report["restarts_tried"].get<int>(), 3);
  EXPECT_EQ(report["seed"].get<int>(), 4);
  EXPECT_EQ(report["K"].get<int>(), 3);
  const auto manifest = nlohmann::json::parse(slurp(path("o/manifest.json")));
  EXPECT_EQ(manifest["config"]["restarts"], "3");
  EXPECT_EQ(manifest["config"]["h"], "2");

  std::ofstream(path("bad.cfg")) << "kk=3\n";
  EXPECT_EQ(tool({"fit", "--config", path("bad.cfg"), "--input", input, "--k", "2", "--h", "1",
                  "--output-dir", path("o2")}).code, 1);
}

TEST_F(Cli, SweepNeedsFourValues) {
  const auto r = tool({"sweep", "--input", profiles(), "--k-range", "1:3", "--output-dir", path("o")});
  EXPECT_EQ(r.code, 5);
}

TEST_F(Cli, SweepWritesTableAndSelection) {
  const auto r = tool({"sweep", "--input", profiles(), "--k-range", "1,2,3,4", "--restarts", "2",
                       "--output-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path("o/sweep.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "K,H,loglik,dof,aic,bic,seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const auto sel = nlohmann::json::parse(slurp(path("o/selection.json")));
  EXPECT_EQ(sel["axis"], "K");

  const auto h = tool({"sweep", "--input", path("profiles.csv"), "--k", "3", "--h-range", "1:3",
                       "--output-dir", path("h")});
  EXPECT_EQ(h.code, 5);
  EXPECT_EQ(tool({"sweep", "--input", path("profiles.csv"), "--h-range", "1:4",
                  "--output-dir", path("h")}).code, 1);
}

TEST_F(Cli, SweepTableSelectsBreakpoint) {
  SweepTable t;
  for (int K = 2; K <= 16; ++K) {
    const auto dof = unrestricted_degrees_of_freedom(20, K);
    const double ll = K >= 10 ? -10000.0 + 50.0 * static_cast<double>(dof)
                              : -10000.0 + 50.0 * 199.0 - 5000.0 * (10 - K);
    t.records.push_back({K, K, ll, dof, 0.0, 0.0, 0});
  }
  {
    std::ofstream out(path("table.csv"));
    write_sweep_csv(out, t);
  }
  const auto r = tool({"sweep", "--table", path("table.csv"), "--output-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sel = nlohmann::json::parse(slurp(path("o/selection.json")));
  EXPECT_EQ(sel["chosen"].get<int>(), 10);
}

TEST_F(Cli, BenchIsReproducibleAndValidatesMethods) {
  const std::vector<std::string> base = {"bench", "--replications", "1", "--seed", "7", "--m", "20",
                                         "--n", "120", "--trials", "40", "--k", "4", "--h0", "2",
                                         "--h-fit", "2", "--alpha", "0.2,1.0", "--restarts", "2"};
  auto a = base;
  a.insert(a.end(), {"--output-dir", path("a"), "--threads", "1"});
  auto b = base;
  b.insert(b.end(), {"--output-dir", path("b"), "--threads", "2"});
  ASSERT_EQ(tool(a).code, 0);
  ASSERT_EQ(tool(b).code, 0);
  const auto csv = slurp(path("a/bench.csv"));
  EXPECT_EQ(csv, slurp(path("b/bench.csv")));
  EXPECT_EQ(slurp(path("a/bench_summary.csv")), slurp(path("b/bench_summary.csv")));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,alpha,H0,H_fit,replication,rate");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);

  auto bad = base;
  bad.insert(bad.end(), {"--output-dir", path("c"), "--methods", "em,spectral"});
  EXPECT_EQ(tool(bad).code, 1);
}

TEST_F(Cli, ReportOnSingleWordModel) {
  const auto input = profiles();
  ASSERT_EQ(tool({"fit", "--input", input, "--k", "3", "--h", "1", "--output-dir", path("f")}).code, 0);
  const auto r = tool({"report", "--model", path("f/model.json"), "--input", input,
                       "--output-dir", path("r")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(path("r/report.json")));
  const auto model = model_from_json(nlohmann::json::parse(slurp(path("f/model.json")))).model;
  for (const auto& c : report["clusters"]) {
    ASSERT_EQ(c["word_mixture"].size(), 1u);
    EXPECT_EQ(c["word_mixture"][0]["weight"].get<double>(), 1.0);
    const int k = c["cluster"].get<int>() - 1;
    for (std::size_t j = 0; j < c["theta"].size(); ++j) {
      double s = 0.0;
      for (Eigen::Index h = 0; h < model.H(); ++h) {
        s += model.dictionary()(static_cast<Eigen::Index>(j), h) * model.loadings()(h, k);
      }
      EXPECT_NEAR(c["theta"][j].get<double>(), s, 1e-12);
    }
  }
  const auto assignments = slurp(path("r/assignments.csv"));
  EXPECT_EQ(std::count(assignments.begin(), assignments.end(), '\n'), 61);
  EXPECT_EQ(assignments.substr(0, assignments.find('\n')), "row_key,cluster,responsibility");
  EXPECT_TRUE(fs::exists(path("r/heatmap.csv")));
}

TEST_F(Cli, ReportRejectsMismatchedModel) {
  const auto input = profiles();
  Rng rng(1);
  Matrix phi = Matrix::Constant(5, 1, 0.2);
  const FactoredMixture small(Vector::Ones(1), phi, Matrix::Ones(1, 1));
  std::ofstream(path("model.json")) << model_to_json(small, {}).dump();
  EXPECT_EQ(tool({"report", "--model", path("model.json"), "--input", input, "--output-dir",
                  path("r")}).code, 1);
  std::ofstream(path("broken.json")) << "{\"K\": 1,";
  EXPECT_EQ(tool({"report", "--model", path("broken.json"), "--input", input, "--output-dir",
                  path("r")}).code, 6);
}

TEST_F(Cli, ManifestListsDigestsOfEverything) {
  const auto input = profiles();
  ASSERT_EQ(tool({"fit", "--input", input, "--k", "2", "--h", "1", "--output-dir", path("o")}).code, 0);
  const auto m = nlohmann::json::parse(slurp(path("o/manifest.json")));
  EXPECT_EQ(m["command"], "fit");
  EXPECT_EQ(m["seed"].get<int>(), 0);
  EXPECT_EQ(m["inputs"][0]["sha256"], cli::sha256_hex(slurp(input)));
  ASSERT_EQ(m["outputs"].size(), 3u);
  for (const auto& o : m["outputs"]) {
    EXPECT_EQ(o["sha256"], cli::sha256_hex(slurp(path("o/" + o["path"].get<std::string>()))));
  }
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  for (const auto& entry : fs::directory_iterator(path("o"))) {
    EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos);
  }
}

}  // namespace
}  // namespace nmfem
