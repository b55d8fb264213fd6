//
// Copyright 2026 The mahadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include "mahadp/config.h"

#include <cmath>
#include <limits>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "mahadp/error.h"
#include "mahadp/rng.h"
#include "test_util.h"

namespace mahadp {
namespace {

using ::testing::HasSubstr;

TEST(RunConfigTest, DefaultsMirrorTheExperimentGrid) {
  const RunConfig c;
  EXPECT_EQ(c.epsilon_grid, (std::vector<double>{1, 5, 10, 20, 40}));
  EXPECT_EQ(c.lambda_grid, (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  EXPECT_EQ(c.repetitions, 100);
  EXPECT_EQ(c.oov_policy, OovPolicy::kPassThrough);
  EXPECT_NO_THROW(c.Validate());
}

TEST(RunConfigTest, DefaultRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(ParseRunConfig(SerializeRunConfig(c)), c);
}

TEST(RunConfigTest, RandomizedRoundTripIsLossless) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    RunConfig c;
    c.embedding_path = "/data/emb_" + std::to_string(t) + ".vec";
    c.embedding_format = t % 2 ? EmbeddingFormat::kWord2VecText : EmbeddingFormat::kGloveText;
    c.vocab_paths = {"a.tsv", "dir/b.txt"};
    if (t % 3 == 0) c.vocab_paths.clear();
    c.covariance_path = t % 4 ? "" : "cov.json";
    c.epsilon_grid.clear();
    for (int k = 0; k < 1 + t % 4; ++k) c.epsilon_grid.push_back(rng.UniformOpen() * 100);
    c.lambda_grid = {rng.UniformOpen(), 0.1, 1.0 / 3.0};
    c.repetitions = 1 + static_cast<int>(rng.NextU64() % 1000);
    c.seed = rng.NextU64();
    c.oov_policy = static_cast<OovPolicy>(t % 3);
    c.lowercase = t % 2 == 0;
    c.eigenvalue_floor = std::ldexp(rng.UniformOpen(), -30);
    c.output_dir = "out dir/" + std::to_string(t);
    const RunConfig back = ParseRunConfig(SerializeRunConfig(c));
    ASSERT_EQ(back, c) << SerializeRunConfig(c);
    EXPECT_EQ(SerializeRunConfig(back), SerializeRunConfig(c));
  }
}

TEST(RunConfigTest, CommentsBlankLinesAndSpacing) {
  const RunConfig c = ParseRunConfig(
      "# comment\n\n  epsilon_grid=2 , 4\r\nlambda_grid = 1\nlowercase = true\nseed = 7\n");
  EXPECT_EQ(c.epsilon_grid, (std::vector<double>{2, 4}));
  EXPECT_EQ(c.lambda_grid, (std::vector<double>{1}));
  EXPECT_TRUE(c.lowercase);
  EXPECT_EQ(c.seed, 7u);
}

TEST(RunConfigTest, ParseErrorsAreUsageErrors) {
  EXPECT_THROW(ParseRunConfig("bogus = 1\n"), UsageError);
  EXPECT_THROW(ParseRunConfig("no equals sign\n"), UsageError);
  EXPECT_THROW(ParseRunConfig("repetitions = ten\n"), UsageError);
  EXPECT_THROW(ParseRunConfig("epsilon_grid = 1,,2\n"), UsageError);
  EXPECT_THROW(ParseRunConfig("oov_policy = maybe\n"), UsageError);
  EXPECT_THROW(ParseRunConfig("lowercase = perhaps\n"), UsageError);
  try {
    ParseRunConfig("seed = 1\nwhat = 2\n");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_THAT(e.what(), HasSubstr("line 2"));
  }
}

TEST(RunConfigTest, ValidateRejectsOutOfRangeValues) {
  RunConfig c;
  c.epsilon_grid = {1, 0};
  EXPECT_THROW(c.Validate(), UsageError);
  c = RunConfig();
  c.lambda_grid = {-0.1};
  EXPECT_THROW(c.Validate(), UsageError);
  c = RunConfig();
  c.repetitions = 0;
  EXPECT_THROW(c.Validate(), UsageError);
  c = RunConfig();
  c.eigenvalue_floor = 0;
  EXPECT_THROW(c.Validate(), UsageError);
  c = RunConfig();
  c.epsilon_grid.clear();
  EXPECT_THROW(c.Validate(), UsageError);
}

TEST(RunConfigTest, LoadFromFile) {
  testing::TempDir dir;
  testing::WriteFile(dir / "run.cfg", "repetitions = 12\n");
  EXPECT_EQ(LoadRunConfig((dir / "run.cfg").string()).repetitions, 12);
  EXPECT_THROW(LoadRunConfig((dir / "missing.cfg").string()), UsageError);
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.25), "0.25");
  EXPECT_EQ(FormatDouble(1e-8), "1e-08");
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.StandardNormal() * std::pow(10.0, static_cast<int>(rng.NextU64() % 40) - 20);
    EXPECT_EQ(ParseDoubleList(FormatDouble(v)), std::vector<double>{v});
  }
  EXPECT_EQ(ParseDoubleList("1,2.5"), (std::vector<double>{1, 2.5}));
}

}  // namespace
}  // namespace mahadp
