#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mscan/errors.hpp"
#include "mscan/montecarlo.hpp"

using namespace mscan;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::size_t count_fields(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST(SizeTable, LayoutAndMetadata) {
  SizeTableConfig cfg;
  cfg.replications = 20;
  cfg.seed = 5;
  const auto table = size_table(cfg);
  ASSERT_EQ(table.rows.size(), 6u);
  std::size_t cells = 0;
  for (const auto& row : table.rows) {
    ASSERT_EQ(row.rejection.size(), 3u);
    for (double v : row.rejection) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      ++cells;
    }
  }
  EXPECT_EQ(cells, 18u);

  const auto csv = lines(table.to_csv());
  EXPECT_EQ(csv[0], "# table: size");
  EXPECT_NE(std::find(csv.begin(), csv.end(), "# replications: 20"), csv.end());
  EXPECT_NE(std::find(csv.begin(), csv.end(), "# seed: 5"), csv.end());
  auto header = std::find(csv.begin(), csv.end(), "alpha,tn,n=100,n=500,n=1000");
  ASSERT_NE(header, csv.end());
  EXPECT_EQ(csv.end() - header, 7);
  EXPECT_EQ((header + 1)->substr(0, 11), "0.1,n^-1/5,");
  EXPECT_EQ((header + 4)->substr(0, 5), "0.05,");
  for (auto it = header + 1; it != csv.end(); ++it) EXPECT_EQ(count_fields(*it), 5u);
}

TEST(SizeTable, SingleReplicationGivesZeroOrOne) {
  SizeTableConfig cfg;
  cfg.replications = 1;
  for (const auto& row : size_table(cfg).rows) {
    for (double v : row.rejection) EXPECT_TRUE(v == 0.0 || v == 1.0);
  }
}

TEST(SizeTable, NestedInLevel) {
  const auto rule = TruncationRule::power(1.0 / 3);
  const auto r = size_cell(DesignSpec::design(1), 200, rule, {0.2, 0.1, 0.05, 0.01}, 300, 2);
  for (std::size_t k = 1; k < r.size(); ++k) EXPECT_LE(r[k], r[k - 1]);
}

TEST(SizeTable, Deterministic) {
  SizeTableConfig cfg;
  cfg.sample_sizes = {100, 200};
  cfg.replications = 50;
  const auto a = size_table(cfg).to_csv();
  EXPECT_EQ(a, size_table(cfg).to_csv());
}

#ifdef _OPENMP
TEST(SizeTable, ThreadCountIndependent) {
  const auto rule = TruncationRule::power(0.5);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = size_cell(DesignSpec::design(1), 150, rule, {0.1, 0.05}, 100, 3);
  omp_set_num_threads(3);
  const auto three = size_cell(DesignSpec::design(1), 150, rule, {0.1, 0.05}, 100, 3);
  omp_set_num_threads(saved);
  EXPECT_EQ(one, three);
}
#endif

TEST(SizeTable, Errors) {
  SizeTableConfig cfg;
  cfg.replications = 0;
  EXPECT_THROW(size_table(cfg), InvalidInput);
  cfg.replications = 10;
  cfg.sample_sizes = {};
  EXPECT_THROW(size_table(cfg), InvalidInput);
}

TEST(PowerTable, LayoutForDesignThree) {
  PowerTableConfig cfg;
  cfg.design = DesignSpec::design(3);
  cfg.replications = 2;
  cfg.lf_replications = 2;
  const auto table = power_table(cfg);
  EXPECT_EQ(table.rows.size(), 18u);
  const auto csv = lines(table.to_csv());
  EXPECT_EQ(csv[0], "# table: power");
  EXPECT_NE(std::find(csv.begin(), csv.end(), "# design: 3"), csv.end());
  auto header = std::find(csv.begin(), csv.end(), "tn,offset,n=100,n=500,n=1000");
  ASSERT_NE(header, csv.end());
  EXPECT_EQ(csv.end() - header, 19);
  EXPECT_EQ((header + 1)->substr(0, 9), "n^-1/5,0,");
  EXPECT_EQ((header + 6)->substr(0, 11), "n^-1/5,0.5,");
  EXPECT_EQ((header + 7)->substr(0, 9), "n^-1/3,0,");
  EXPECT_EQ(table.at(TruncationRule::power(0.5), 0.3, 500), table.rows[15].rejection[1]);
  EXPECT_THROW(table.at(TruncationRule::power(0.5), 0.35, 500), InvalidInput);
}

TEST(PowerTable, IncreasesWithOffset) {
  const auto rule = TruncationRule::power(1.0 / 3);
  const std::size_t reps = 300;
  const auto r = power_cell(DesignSpec::design(1), 200, rule, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}, 0.05,
                            reps, 300, 4);
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double se = std::sqrt((r[k] * (1 - r[k]) + r[k - 1] * (1 - r[k - 1])) / reps);
    EXPECT_GE(r[k], r[k - 1] - 2 * se) << k;
  }
  EXPECT_GT(r.back(), 0.9);
}

TEST(PowerTable, SharedSamplesAcrossOffsets) {
  const auto rule = TruncationRule::power(0.5);
  const auto all = power_cell(DesignSpec::design(2), 100, rule, {0.0, 0.2, 0.4}, 0.05, 40, 40, 6);
  const auto one = power_cell(DesignSpec::design(2), 100, rule, {0.2}, 0.05, 40, 40, 6);
  EXPECT_EQ(all[1], one[0]);
}
