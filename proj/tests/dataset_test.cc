#include "fmlfs/dataset.h"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fmlfs/error.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace fmlfs {
namespace {

const std::filesystem::path kDataDir = FMLFS_DATA_DIR;

MultiLabelDataset OneFeature(const std::vector<double>& xs) {
  MultiLabelDataset ds;
  ds.features = Matrix<double>(xs.size(), 1);
  ds.labels = Matrix<std::uint8_t>(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ds.features(i, 0) = xs[i];
    ds.labels(i, 0) = i % 2;
  }
  ds.feature_names = {"x"};
  ds.label_names = {"y"};
  return ds;
}

TEST(DiscretizeTest, OneValuePerBin) {
  const auto dd = Discretize(OneFeature({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), 10);
  ASSERT_EQ(dd.num_features(), 1u);
  for (std::uint32_t i = 0; i < 10; ++i) EXPECT_EQ(dd.code(i, 0), i);
  EXPECT_EQ(dd.bin_edges[0].size(), 9u);
}

TEST(DiscretizeTest, ConstantFeatureIsBinZero) {
  const auto dd = Discretize(OneFeature({5, 5, 5}), 10);
  EXPECT_EQ(dd.feature_codes[0], (std::vector<std::uint32_t>{0, 0, 0}));
}

TEST(DiscretizeTest, MaxGoesToLastBin) {
  const auto dd = Discretize(OneFeature({0.0, 1.0}), 2);
  EXPECT_EQ(dd.feature_codes[0], (std::vector<std::uint32_t>{0, 1}));
}

TEST(DiscretizeTest, RejectsSingleBin) {
  EXPECT_THROW(Discretize(OneFeature({0, 1}), 1), Error);
}

TEST(DiscretizeTest, MonotoneAndInRange) {
  std::mt19937_64 rng(3);
  const auto ds = oracle::RandomDataset(rng, 300, 4, 2);
  for (std::size_t bins : {2u, 7u, 10u}) {
    const auto dd = Discretize(ds, bins);
    for (std::size_t f = 0; f < 4; ++f) {
      for (std::size_t i = 1; i < dd.bin_edges[f].size(); ++i) {
        EXPECT_LE(dd.bin_edges[f][i - 1], dd.bin_edges[f][i]);
      }
      for (std::size_t a = 0; a < 300; ++a) {
        EXPECT_LT(dd.code(a, f), bins);
        for (std::size_t b = 0; b < 300; b += 7) {
          if (ds.features(a, f) <= ds.features(b, f)) {
            EXPECT_LE(dd.code(a, f), dd.code(b, f));
          }
        }
      }
    }
    EXPECT_EQ(dd.label_codes.size(), 2u);
  }
}

TEST(CsvTest, ParsesFeaturesAndLabels) {
  std::istringstream in(
      "a,b,c,y1,y2\n"
      "1,2,3,0,1\n"
      "4,5,6,1,1\n"
      "7,8,9,0,0\n"
      "-1.5,2e3,0,1,0\n");
  const auto ds = ParseCsv(in, 2);
  EXPECT_EQ(ds.num_instances(), 4u);
  EXPECT_EQ(ds.num_features(), 3u);
  EXPECT_EQ(ds.num_labels(), 2u);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(ds.label_names, (std::vector<std::string>{"y1", "y2"}));
  EXPECT_DOUBLE_EQ(ds.features(3, 1), 2000.0);
  EXPECT_EQ(ds.labels(1, 0), 1);
}

TEST(CsvTest, Errors) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return ParseCsv(in, 1);
  };
  EXPECT_THROW(parse("a,y\n1,0\n2\n"), Error);        // ragged
  EXPECT_THROW(parse("a,y\nfoo,0\n"), Error);         // non-numeric
  EXPECT_THROW(parse("a,y\n1,2\n"), Error);           // label not binary
  EXPECT_THROW(parse("a,y\n"), Error);                // no rows
  EXPECT_THROW(parse(""), Error);                     // no header
  EXPECT_THROW(parse("y\n1\n"), Error);               // no feature column
}

TEST(CsvTest, RoundTrip) {
  std::mt19937_64 rng(8);
  const auto ds = oracle::RandomDataset(rng, 50, 6, 3);
  std::stringstream buf;
  WriteCsv(ds, buf);
  const auto back = ParseCsv(buf, 3);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.feature_names, ds.feature_names);
  ASSERT_EQ(back.num_features(), 6u);
  for (std::size_t r = 0; r < 50; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      EXPECT_NEAR(back.features(r, c), ds.features(r, c), 1e-12);
    }
  }
}

constexpr char kArff[] = R"(% toy
@relation toy
@attribute 'f one' numeric
@attribute f2 REAL
@attribute lab1 {0,1}
@attribute lab2 {0,1}
@data
0.5,1,0,1
% comment in data
1.5,2,1,1
2.5,3,0,0
)";

TEST(ArffTest, TrailingLabels) {
  std::istringstream in(kArff);
  const auto ds = ParseArff(in, std::size_t{2});
  EXPECT_EQ(ds.num_instances(), 3u);
  EXPECT_EQ(ds.num_features(), 2u);
  EXPECT_EQ(ds.feature_names[0], "f one");
  EXPECT_EQ(ds.label_names, (std::vector<std::string>{"lab1", "lab2"}));
  EXPECT_EQ(ds.labels(1, 0), 1);
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 3.0);
}

TEST(ArffTest, XmlManifest) {
  const auto dir = std::filesystem::temp_directory_path() / "fmlfs_arff_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "labels.xml")
        << "<?xml version=\"1.0\"?>\n<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n"
           "<label name=\"lab2\"></label>\n<label name='lab1'></label>\n</labels>\n";
    std::ofstream(dir / "bad.xml") << "<labels><label name=\"nope\"></label></labels>";
  }
  std::istringstream in(kArff);
  const auto ds = ParseArff(in, dir / "labels.xml");
  EXPECT_EQ(ds.label_names, (std::vector<std::string>{"lab2", "lab1"}));
  EXPECT_EQ(ds.labels(0, 0), 1);
  std::istringstream in2(kArff);
  EXPECT_THROW(ParseArff(in2, dir / "bad.xml"), Error);
  std::filesystem::remove_all(dir);
}

TEST(ArffTest, Errors) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return ParseArff(in, std::size_t{1});
  };
  const std::string header = "@relation r\n@attribute a numeric\n@attribute y {0,1}\n@data\n";
  EXPECT_THROW(parse(header + "1,2\n"), Error);        // label value 2
  EXPECT_THROW(parse(header + "?,1\n"), Error);        // missing value
  EXPECT_THROW(parse(header + "{0 1}\n"), Error);      // sparse row
  EXPECT_THROW(parse(header + "1\n"), Error);          // arity
  EXPECT_THROW(parse(header), Error);                  // no rows
  EXPECT_THROW(parse("@relation r\n@attribute a string\n@data\n"), Error);
  EXPECT_THROW(parse("@relation r\n@attribute y {0,1}\n@data\n1\n"), Error);
  EXPECT_THROW(parse("@relation r\n@attribute a numeric\n"), Error);
  EXPECT_THROW(parse("@relation r\nbogus\n@data\n"), Error);
}

TEST(PartitionTest, DeterministicExhaustiveNonEmpty) {
  std::mt19937_64 rng(1);
  const auto ds = oracle::RandomDataset(rng, 400, 3, 5, 0.2);
  const auto a = PartitionNonIid(ds, 10, 0.5, 7);
  const auto b = PartitionNonIid(ds, 10, 0.5, 7);
  EXPECT_EQ(a.assignments, b.assignments);
  ASSERT_EQ(a.assignments.size(), 400u);
  EXPECT_NO_THROW(a.Validate());
  std::size_t total = 0;
  std::set<std::size_t> seen;
  for (const auto& rows : a.RowsPerClient()) {
    EXPECT_FALSE(rows.empty());
    total += rows.size();
    seen.insert(rows.begin(), rows.end());
  }
  EXPECT_EQ(total, 400u);
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_NE(PartitionNonIid(ds, 10, 0.5, 8).assignments, a.assignments);
}

TEST(PartitionTest, TinyAlphaStillFillsEveryClient) {
  std::mt19937_64 rng(2);
  const auto ds = oracle::RandomDataset(rng, 30, 2, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_NO_THROW(PartitionNonIid(ds, 8, 1e-3, seed).Validate());
  }
}

TEST(PartitionTest, LargeAlphaApproachesGlobalProportions) {
  std::mt19937_64 rng(4);
  const auto ds = oracle::RandomDataset(rng, 4000, 2, 3, 0.3);
  const auto plan = PartitionNonIid(ds, 2, 1e6, 99);
  const auto primary = [&](std::size_t r) {
    for (std::size_t l = 0; l < 3; ++l) {
      if (ds.labels(r, l)) return l;
    }
    return std::size_t{3};
  };
  std::vector<double> global(4, 0);
  std::vector<std::vector<double>> local(2, std::vector<double>(4, 0));
  for (std::size_t r = 0; r < 4000; ++r) {
    global[primary(r)] += 1.0 / 4000;
    local[plan.assignments[r]][primary(r)] += 1;
  }
  for (auto& counts : local) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(counts[c] / total, global[c], 0.01);
  }
}

TEST(PartitionTest, Errors) {
  std::mt19937_64 rng(5);
  const auto ds = oracle::RandomDataset(rng, 5, 2, 2);
  EXPECT_THROW(PartitionNonIid(ds, 1, 0.5, 0), Error);
  EXPECT_THROW(PartitionNonIid(ds, 6, 0.5, 0), Error);
  EXPECT_THROW(PartitionNonIid(ds, 2, 0.0, 0), Error);
}

TEST(PartitionTest, JsonRoundTrip) {
  std::mt19937_64 rng(6);
  const auto ds = oracle::RandomDataset(rng, 40, 2, 2);
  const auto plan = PartitionNonIid(ds, 3, 0.5, 12);
  const auto j = ToJson(plan);
  EXPECT_EQ(j.at("seed"), 12u);
  EXPECT_EQ(j.at("num_clients"), 3u);
  const auto back = PartitionPlanFromJson(j);
  EXPECT_EQ(back.assignments, plan.assignments);
  EXPECT_THROW(PartitionPlanFromJson(nlohmann::json{{"seed", 1}}), Error);
}

TEST(SplitTest, SizesAndDeterminism) {
  std::mt19937_64 rng(7);
  const auto ds = oracle::RandomDataset(rng, 10, 2, 2);
  for (std::uint64_t seed : {0u, 1u, 77u}) {
    const auto [train, test] = SplitTrainTest(ds, 0.3, seed);
    EXPECT_EQ(train.num_instances(), 7u);
    EXPECT_EQ(test.num_instances(), 3u);
  }
  const auto a = SplitTrainTest(ds, 0.3, 5);
  const auto b = SplitTrainTest(ds, 0.3, 5);
  EXPECT_EQ(a.first.features, b.first.features);
  EXPECT_EQ(a.second.labels, b.second.labels);
}

TEST(SplitTest, FractionOutOfRange) {
  std::mt19937_64 rng(7);
  const auto ds = oracle::RandomDataset(rng, 10, 2, 2);
  EXPECT_THROW(SplitTrainTest(ds, 1.0, 0), Error);
  EXPECT_THROW(SplitTrainTest(ds, 0.0, 0), Error);
  EXPECT_THROW(SplitTrainTest(ds, 0.01, 0), Error);
}

TEST(YeastTest, ShapeAndPartition) {
  const auto path = kDataDir / "yeast.csv";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "yeast.csv not present";
  const auto ds = LoadCsv(path, 14);
  EXPECT_EQ(ds.num_instances(), 2417u);
  EXPECT_EQ(ds.num_features(), 103u);
  EXPECT_EQ(ds.num_labels(), 14u);
  const auto plan = PartitionNonIid(ds, 10, 0.5, 7);
  std::size_t total = 0;
  for (const auto& rows : plan.RowsPerClient()) {
    EXPECT_FALSE(rows.empty());
    total += rows.size();
  }
  EXPECT_EQ(total, 2417u);
}

}  // namespace
}  // namespace fmlfs
