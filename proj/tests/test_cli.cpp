#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "commands.hpp"
#include "mscan/csv_io.hpp"
#include "mscan/errors.hpp"
#include "mscan/models.hpp"
#include "oracle.hpp"

using namespace mscan;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("mscan_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

// 20 interval observations with W in [x - 1, x + 1].
std::string interval_fixture() {
  std::ostringstream os;
  os << "x1,wl,wh\n";
  for (int i = 0; i < 20; ++i) {
    const double x = (i * 7 % 20) / 19.0;
    os << x << ',' << x - 1 << ',' << x + 1 << '\n';
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST(Csv, ParsesSentinelsAndEmptyCells) {
  std::istringstream in("x1,x2,wl,wh\n0.5,1,,\n0.25,2,INF,inf\n1,3,-Inf,2.5\n0,0, -1 ,+3\n");
  const auto d = read_dataset(in);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d.dimension(), 2u);
  EXPECT_EQ(d.w_lo[0], -kInf);
  EXPECT_EQ(d.w_hi[0], kInf);
  EXPECT_EQ(d.w_lo[1], kInf);
  EXPECT_EQ(d.w_lo[2], -kInf);
  EXPECT_EQ(d.w_hi[2], 2.5);
  EXPECT_EQ(d.w_lo[3], -1.0);
  EXPECT_EQ(d.w_hi[3], 3.0);
  EXPECT_EQ(d.x(2, 1), 3.0);
}

TEST(Csv, MissingModelColumnsOnly) {
  std::istringstream in("wh,x1\n0.3,0.1\n,0.7\r\n");
  const auto d = read_dataset(in);
  EXPECT_EQ(d.w_hi[0], 0.3);
  EXPECT_EQ(d.w_hi[1], kInf);
  EXPECT_EQ(d.w_lo[0], -kInf);
  EXPECT_EQ(d.x(1, 0), 0.7);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_dataset(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("x1,wh\n0.1,1\n0.2,abc\n"), 3u);
  EXPECT_EQ(line_of("x1,wh\n0.1,1\n0.2\n"), 3u);
  EXPECT_EQ(line_of("x1,wh\n0.1,nan\n"), 2u);
  EXPECT_EQ(line_of("x1,wl,wh\n0.1,2,1\n"), 2u);
  EXPECT_EQ(line_of("x1,wh\ninf,1\n"), 2u);
  EXPECT_EQ(line_of("x1,wh\n,1\n"), 2u);
  EXPECT_EQ(line_of("x2,wh\n0.1,1\n"), 1u);
  EXPECT_EQ(line_of("x1,y\n0.1,1\n"), 1u);
  EXPECT_EQ(line_of(""), 1u);
}

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> kind(0, 4);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rep % 30, d = 1 + rep % 3;
    Dataset data;
    data.x = Matrix(n, d);
    for (auto& v : data.x.data()) v = z(rng) * std::pow(10.0, z(rng) * 5);
    for (std::size_t i = 0; i < n; ++i) {
      double lo = z(rng), hi = lo + std::abs(z(rng));
      switch (kind(rng)) {
        case 0: lo = -kInf; break;
        case 1: hi = kInf; break;
        case 2: lo = -kInf; hi = kInf; break;
        case 3: hi = lo; break;
        default: break;
      }
      data.w_lo.push_back(lo);
      data.w_hi.push_back(hi);
    }
    std::istringstream in(dataset_csv(data));
    const auto back = read_dataset(in);
    EXPECT_EQ(back.x, data.x);
    EXPECT_EQ(back.w_lo, data.w_lo);
    EXPECT_EQ(back.w_hi, data.w_hi);
  }
}

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-kInf), "-inf");
  EXPECT_EQ(format_double(kInf), "inf");
}

TEST(Parsing, Helpers) {
  EXPECT_DOUBLE_EQ(cli::parse_real("1/3"), 1.0 / 3.0);
  EXPECT_EQ(cli::parse_real("0.25"), 0.25);
  EXPECT_THROW(cli::parse_real("1/0"), InvalidInput);
  EXPECT_THROW(cli::parse_real("x"), InvalidInput);
  EXPECT_EQ(cli::parse_truncation("pow:1/3"), TruncationRule::power(1.0 / 3.0));
  EXPECT_EQ(cli::parse_truncation("pow-scaled:0.5"), TruncationRule::power_scaled(0.5));
  EXPECT_EQ(cli::parse_truncation("fixed:0.1"), TruncationRule::fixed(0.1));
  EXPECT_THROW(cli::parse_truncation("pow"), InvalidInput);
  EXPECT_THROW(cli::parse_truncation("log:2"), InvalidInput);
  EXPECT_EQ(cli::parse_method("lf"), CritvalMethod::least_favorable);
  EXPECT_THROW(cli::parse_method("bootstrap"), InvalidInput);
  const auto g = cli::parse_grid("t1:-1:1:5,t2:0:2:3");
  EXPECT_EQ(g.size(), 15u);
  EXPECT_EQ(g.point(14).values, (std::vector<double>{1, 2}));
  EXPECT_THROW(cli::parse_grid("t1:0:1"), InvalidGrid);
  EXPECT_THROW(cli::parse_grid("t1:0:1:0"), InvalidGrid);
}

TEST(CliTest, InsideIdentifiedSet) {
  TempDir dir;
  const auto data = dir.write("d.csv", interval_fixture());
  const auto r = run({"test", "--data", data, "--model", "interval", "--theta", "0,1", "--tn",
                      "fixed:0.2", "--seed", "17"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["reject"], false);
  EXPECT_EQ(j["S"], 0.0);
  for (const char* key : {"theta", "T", "S", "method", "threshold", "reject", "n", "d_X", "d_Y",
                          "t_n", "vol_hull", "cells_evaluated", "cells_skipped", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["seed"], 17);
  EXPECT_EQ(j["n"], 20);
  EXPECT_EQ(j["d_Y"], 2);
  EXPECT_EQ(j["method"], "analytic");
}

TEST(CliTest, LargeInterceptRejectsAndMatchesBruteForce) {
  TempDir dir;
  const auto path = dir.write("d.csv", interval_fixture());
  const auto r = run({"test", "--data", path, "--model", "interval", "--theta", "50,0", "--tn",
                      "fixed:0.2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["reject"], true);

  const auto data = read_dataset(fs::path(path));
  const auto m = interval_regression_moments(data, Theta{{50, 0}});
  const auto expected = oracle::naive_scan(data.x, m.values, 0.2);
  EXPECT_EQ(j["S"].get<double>(), expected.S);
  EXPECT_EQ(j["T"][0].get<double>(), expected.T[0]);
  EXPECT_EQ(j["T"][1].get<double>(), expected.T[1]);
  EXPECT_EQ(j["cells_evaluated"].get<std::size_t>(), expected.evaluated);
}

TEST(CliTest, MalformedRowExitsTwo) {
  TempDir dir;
  const auto data = dir.write("bad.csv", "x1,wl,wh\n0.1,0,1\n0.2,zero,1\n");
  const auto r = run({"test", "--data", data, "--model", "interval", "--theta", "0,0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(CliTest, ConfigurationErrorsExitTwo) {
  TempDir dir;
  const auto data = dir.write("d.csv", interval_fixture());
  EXPECT_EQ(run({"test", "--data", data, "--theta", "0,0", "--critval", "nope"}).code, 2);
  EXPECT_EQ(run({"test", "--data", data, "--theta", "0,0,0"}).code, 2);
  EXPECT_EQ(run({"test", "--data", data}).code, 2);
  EXPECT_EQ(run({"test", "--data", dir.file("missing.csv"), "--theta", "0,0"}).code, 2);
  EXPECT_EQ(run({"test", "--data", data, "--theta", "0,0", "--tn", "fixed:5"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliTest, RefinedReportsRootNScale) {
  TempDir dir;
  const auto data = dir.write("d.csv", interval_fixture());
  const auto r = run({"test", "--data", data, "--theta", "0,1", "--tn", "fixed:0.05",
                      "--critval", "refined"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["threshold_scale"], "sqrt(n)*S");
}

TEST(CliRegion, NestedAcrossLevels) {
  TempDir dir;
  std::ostringstream os;
  os << "x1,wh\n";
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 300; ++i) {
    const double x = u(rng), w = 2 * u(rng) - 1;
    os << x << ',' << (u(rng) < 0.1 ? std::string() : format_double(w)) << '\n';
  }
  const auto data = dir.write("m.csv", os.str());
  auto accepted = [&](const std::string& alpha) {
    const auto r = run({"region", "--data", data, "--model", "missing", "--grid",
                        "t1:-0.4:0.6:26,t2:-0.5:0.5:11", "--tn", "pow-scaled:1/3", "--critval",
                        "simulated", "--B", "200", "--alpha", alpha, "--seed", "4", "--out",
                        dir.file("region_" + alpha + ".csv")});
    EXPECT_EQ(r.code, 0) << r.err;
    return Json::parse(r.out);
  };
  const auto a05 = accepted("0.05");
  const auto a10 = accepted("0.10");
  EXPECT_LE(a10["accepted"].get<int>(), a05["accepted"].get<int>());
  EXPECT_EQ(a05["projections"].size(), 2u);
  EXPECT_EQ(a05["seed"], 4);
  // row-level nesting
  std::istringstream f05(read_file(dir.file("region_0.05.csv")));
  std::istringstream f10(read_file(dir.file("region_0.10.csv")));
  std::string l05, l10;
  while (std::getline(f05, l05) && std::getline(f10, l10)) {
    if (l10.back() == '1') EXPECT_EQ(l05.back(), '1');
  }
}

TEST(CliRegion, SinglePointGrid) {
  TempDir dir;
  const auto data = dir.write("d.csv", interval_fixture());
  const auto out = dir.file("r.csv");
  const auto r = run({"region", "--data", data, "--grid", "t1:0:0:1,t2:1:1:1", "--tn", "fixed:0.2",
                      "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(read_file(out));
  std::vector<std::string> rows;
  for (std::string l; std::getline(csv, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "theta1,theta2,statistic,threshold,accepted");
  EXPECT_EQ(Json::parse(r.out)["accepted"], 1);
}

TEST(CliRegion, RequiresOut) {
  TempDir dir;
  const auto data = dir.write("d.csv", interval_fixture());
  EXPECT_EQ(run({"region", "--data", data, "--grid", "t1:0:0:1,t2:1:1:1"}).code, 2);
}

TEST(CliCritval, WorkedAnalyticValue) {
  const auto r = run({"critval", "--critval", "analytic", "--n", "1000", "--c-hat", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j["threshold"].get<double>(), 0.1114168217, 1e-9);
  EXPECT_EQ(j["threshold_scale"], "S");
}

TEST(CliCritval, LeastFavorableFromSampleSize) {
  const auto r = run({"critval", "--critval", "lf", "--n", "100", "--tn", "pow:1/2", "--B", "50",
                      "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["method"], "least_favorable");
  EXPECT_EQ(j["replications"], 50);
  EXPECT_EQ(j["seed"], 9);
}

TEST(CliMc, SizeTableLayout) {
  const auto r = run({"mc", "--table", "size", "--design", "1", "--n", "100,500,1000", "--reps",
                      "1", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  std::vector<std::string> rows;
  for (std::string l; std::getline(is, l);) {
    if (!l.empty() && l[0] != '#') rows.push_back(l);
  }
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "alpha,tn,n=100,n=500,n=1000");
  std::size_t cells = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string field;
    for (int c = 0; std::getline(row, field, ','); ++c) {
      if (c < 2) continue;
      EXPECT_TRUE(field == "0.0000" || field == "1.0000") << field;
      ++cells;
    }
  }
  EXPECT_EQ(cells, 18u);
  EXPECT_NE(r.out.find("# seed: 3"), std::string::npos);
  EXPECT_NE(r.out.find("# replications: 1"), std::string::npos);
}

TEST(CliMc, PowerTableLayoutToFile) {
  TempDir dir;
  const auto out = dir.file("power.csv");
  const auto r = run({"mc", "--table", "power", "--design", "3", "--reps", "1", "--B", "1",
                      "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(read_file(out));
  std::vector<std::string> rows;
  for (std::string l; std::getline(is, l);) {
    if (!l.empty() && l[0] != '#') rows.push_back(l);
  }
  ASSERT_EQ(rows.size(), 19u);
  EXPECT_EQ(rows[0], "tn,offset,n=100,n=500,n=1000");
}

TEST(CliMc, BadArguments) {
  EXPECT_EQ(run({"mc", "--table", "power", "--design", "4", "--reps", "1"}).code, 2);
  EXPECT_EQ(run({"mc", "--table", "sizes"}).code, 2);
  EXPECT_EQ(run({"mc", "--table", "size", "--tn", "fixed:0.1", "--reps", "1"}).code, 2);
  EXPECT_EQ(run({"mc", "--table", "size", "--n", "100,x", "--reps", "1"}).code, 2);
}
