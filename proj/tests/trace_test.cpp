// Copyright 2026 The geopipe Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geopipe/trace.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace geopipe {
namespace {

using namespace std::chrono_literals;

int count_phase(const nlohmann::json& doc, const std::string& ph) {
  int n = 0;
  for (const auto& e : doc) n += e["ph"] == ph;
  return n;
}

SimReport two_stage(ClusterSpec& c) {
  c = {{0, 1}, {LinkSpec{200, 1e15, 0ns}}};
  return simulate(c, build_1f1b(2, 4), ComputeProfile::uniform(1ms, 1ms), IterationConfig(1, 1, 4),
                  HbmSpec::unbounded(2));
}

TEST(TraceTest, SingleTask) {
  ClusterSpec c{{0}, {}};
  const auto rep = simulate(c, build_1f1b(1, 1), ComputeProfile::uniform(1ms, 1ms), IterationConfig(1, 1, 1),
                            HbmSpec::unbounded(1));
  const auto doc = export_trace(rep, c);
  EXPECT_EQ(count_phase(doc, "X"), 2);
  EXPECT_EQ(count_phase(doc, "i"), 0);
  EXPECT_TRUE(validate_trace(doc).empty());
}

TEST(TraceTest, TwoStageCounts) {
  ClusterSpec c;
  const auto doc = export_trace(two_stage(c), c);
  EXPECT_EQ(count_phase(doc, "X"), 16);
  EXPECT_EQ(count_phase(doc, "i"), 8);
  EXPECT_TRUE(validate_trace(doc).empty());
}

TEST(TraceTest, FieldsAndUnits) {
  ClusterSpec c;
  const auto rep = two_stage(c);
  const auto doc = export_trace(rep, c);
  for (const auto& e : doc) {
    if (e["ph"] != "X") continue;
    const int tid = e["tid"];
    EXPECT_EQ(e["pid"], c.placement[tid]);
    EXPECT_DOUBLE_EQ(e["dur"].get<double>(), 1000.0);
  }
  // Stage 1 runs F1 at 2 ms.
  bool found = false;
  for (const auto& e : doc)
    if (e["ph"] == "X" && e["tid"] == 1 && e["name"] == "F1") {
      EXPECT_DOUBLE_EQ(e["ts"].get<double>(), 2000.0);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(TraceTest, EventCountProperty) {
  for (int p = 1; p <= 5; ++p)
    for (int m = 1; m <= 9; m += 2) {
      ClusterSpec c{std::vector<int>(p, 0), std::vector<LinkSpec>(p - 1, LinkSpec{0, 1e12, 0ns})};
      const auto rep = simulate(c, build_1f1b(p, m), ComputeProfile::uniform(1us, 2us), IterationConfig(1, 1, m),
                                HbmSpec::unbounded(p));
      const auto doc = export_trace(rep, c);
      EXPECT_EQ(count_phase(doc, "X"), 2 * p * m);
      EXPECT_EQ(count_phase(doc, "i"), 2 * m * (p - 1));
      EXPECT_TRUE(validate_trace(doc).empty());
    }
}

TEST(TraceTest, ValidatorCatchesBadEvents) {
  using nlohmann::json;
  EXPECT_FALSE(validate_trace(json::object()).empty());
  json bad = json::array();
  bad.push_back({{"name", "F1"}, {"ph", "X"}, {"ts", 0}, {"pid", 0}, {"tid", 0}});  // no dur
  bad.push_back({{"name", "x"}, {"ph", "Q"}, {"ts", -1}, {"pid", 0.5}, {"tid", 0}});
  bad.push_back({{"ph", "i"}, {"ts", 1}, {"pid", 0}, {"tid", 0}});  // no name
  EXPECT_EQ(validate_trace(bad).size(), 5u);
}

TEST(TraceTest, WriteAndReadBack) {
  ClusterSpec c;
  const auto doc = export_trace(two_stage(c), c);
  const auto path = std::filesystem::temp_directory_path() / "geopipe_trace_test.json";
  write_json(doc, path);
  std::ifstream in(path);
  EXPECT_EQ(nlohmann::json::parse(in), doc);
  std::filesystem::remove(path);
  EXPECT_THROW(write_json(doc, "/nonexistent/dir/trace.json"), IoError);
}

TEST(MetricsCsvTest, Layout) {
  ClusterSpec c;
  std::ostringstream os;
  write_metrics_csv(two_stage(c), os);
  EXPECT_EQ(os.str(),
            "stage,busy_us,idle_us\n"
            "0,8000.000,6000.000\n"
            "1,8000.000,6000.000\n"
            "total,16000.000,12000.000\n");
}

}  // namespace
}  // namespace geopipe
