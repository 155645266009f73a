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

#include "geopipe/calibration.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace geopipe {
namespace {

using namespace std::chrono_literals;

constexpr const char* kHeader = "tokens,t_f_us,t_b_us,act_mem_bytes\n";

TEST(LoadMeasurementsTest, SingleRow) {
  const auto t = load_measurements(std::string(kHeader) + "1024,10.5,21,4096\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].tokens, 1024);
  EXPECT_EQ(t.rows[0].t_f, 10500ns);
  EXPECT_EQ(t.rows[0].t_b, 21us);
  EXPECT_EQ(t.rows[0].act_mem, 4096);
}

TEST(LoadMeasurementsTest, DuplicateTokensNamed) {
  try {
    load_measurements(std::string(kHeader) + "512,1,1,1\n512,2,2,2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("512"), std::string::npos);
  }
}

TEST(LoadMeasurementsTest, MalformedNumberHasLine) {
  try {
    load_measurements(std::string(kHeader) + "512,1,1,1\n1024,abc,1,1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(load_measurements(std::string(kHeader) + "512,1,1\n"), ParseError);
  EXPECT_THROW(load_measurements(std::string(kHeader) + "0,1,1,1\n"), ParseError);
  EXPECT_THROW(load_measurements(std::string(kHeader) + "5,-1,1,1\n"), ParseError);
  EXPECT_THROW(load_measurements(std::string("tokens,tf\n1,2\n")), ParseError);
}

TEST(LoadMeasurementsTest, EmptyFile) {
  EXPECT_THROW(load_measurements(std::string()), ParseError);
  EXPECT_THROW(load_measurements(std::string(kHeader)), ParseError);
}

TEST(LoadMeasurementsTest, MissingFileNamesPath) {
  try {
    load_measurements_file("/nonexistent/dir/prof.csv");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/prof.csv"), std::string::npos);
  }
}

TEST(LoadMeasurementsTest, UnsortedRowsAreSorted) {
  std::mt19937_64 rng(2);
  std::vector<std::int64_t> tokens;
  for (int i = 0; i < 40; ++i) tokens.push_back(1 + static_cast<std::int64_t>(rng() % 100000));
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  auto shuffled = tokens;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::string doc = kHeader;
  for (auto t : shuffled) doc += std::to_string(t) + "," + std::to_string(t % 97) + ",2.5," + std::to_string(t * 3) + "\n";
  const auto table = load_measurements(doc);
  ASSERT_EQ(table.rows.size(), tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    EXPECT_EQ(table.rows[i].tokens, tokens[i]);
    EXPECT_EQ(table.rows[i].t_f, Duration{(tokens[i] % 97) * 1000});
    EXPECT_EQ(table.rows[i].act_mem, tokens[i] * 3);
  }
}

TEST(FitProfileTest, KnotsReproduced) {
  const auto table = load_measurements(std::string(kHeader) +
                                       "512,60.125,120.001,134217728\n"
                                       "1024,55.5,220,268435456\n"  // non-monotone, kept as is
                                       "4096,400,800,1073741824\n");
  const auto prof = fit_profile(table);
  EXPECT_EQ(prof.extrapolation(), Extrapolation::kLinearTail);
  for (const auto& r : table.rows) {
    EXPECT_EQ(prof.pass_times(r.tokens), (PassTimes{r.t_f, r.t_b}));
    EXPECT_EQ(prof.activation_bytes(r.tokens), r.act_mem);
  }
  EXPECT_EQ(prof.pass_times(1024).forward, 55500ns);
}

TEST(FitProfileTest, TailContinuesLastSlope) {
  const auto prof = fit_profile(load_measurements(std::string(kHeader) + "1000,10,20,0\n2000,20,30,0\n"));
  EXPECT_EQ(prof.pass_times(3000), (PassTimes{30us, 40us}));
  EXPECT_EQ(prof.pass_times(500), (PassTimes{10us, 20us}));
}

TEST(FitProfileTest, WriteLoadRoundTrip) {
  MeasurementTable t;
  t.rows = {{16, 1234ns, 5678ns, 1}, {32, 1ms, 2ms, 2}, {64, 2001ns, 0ns, 0}};
  std::ostringstream os;
  write_measurements(t, os);
  const auto back = load_measurements(os.str());
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].tokens, t.rows[i].tokens);
    EXPECT_EQ(back.rows[i].t_f, t.rows[i].t_f);
    EXPECT_EQ(back.rows[i].t_b, t.rows[i].t_b);
    EXPECT_EQ(back.rows[i].act_mem, t.rows[i].act_mem);
  }
}

TEST(FitProfileTest, BundledProfileLoads) {
  const auto path = std::filesystem::path(GEOPIPE_SOURCE_DIR) / "scenarios/profiles/latency_dominated.csv";
  const auto prof = fit_profile(load_measurements_file(path));
  EXPECT_EQ(prof.pass_times(4096), (PassTimes{4ms, 8ms}));
}

TEST(SynthProfileTest, Examples) {
  const auto flat = synth_profile(5us, FractionalDuration(0), FractionalDuration(0), 0, {1, 10, 100});
  for (std::int64_t t : {1, 10, 100}) EXPECT_EQ(flat.pass_times(t), (PassTimes{5us, 5us}));
  const auto lin = synth_profile(0ns, FractionalDuration(1000.0), FractionalDuration(2000.0), 3.0, {1000});
  EXPECT_EQ(lin.pass_times(1000), (PassTimes{1ms, 2ms}));
  EXPECT_EQ(lin.activation_bytes(1000), 3000);
  const auto unit = synth_profile(1ms, FractionalDuration(0), FractionalDuration(0), 0, {1});
  EXPECT_EQ(unit.pass_times(123456), (PassTimes{1ms, 1ms}));
  EXPECT_THROW(synth_profile(1ms, FractionalDuration(0), FractionalDuration(0), 0, {}), ConfigError);
}

TEST(FormatTest, Microseconds) {
  EXPECT_EQ(format_us(0ns), "0.000");
  EXPECT_EQ(format_us(1234567ns), "1234.567");
  EXPECT_EQ(format_us(5ns), "0.005");
}

}  // namespace
}  // namespace geopipe
