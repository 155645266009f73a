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

#ifndef GEOPIPE_ERROR_HPP_
#define GEOPIPE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace geopipe {

// Invalid or inconsistent configuration (bad ranges, dimension mismatch).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document; line is 1-based, 0 when unknown.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line = 0)
      : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A schedule failed validation; carries one message per violation.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "schedule validation failed";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

// Simulation stalled with tasks remaining.
class DeadlockError : public std::runtime_error {
 public:
  DeadlockError(const std::string& what, std::vector<std::string> blocked)
      : std::runtime_error(what), blocked_(std::move(blocked)) {}
  const std::vector<std::string>& blocked() const noexcept { return blocked_; }

 private:
  std::vector<std::string> blocked_;
};

// No configuration satisfies the constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geopipe

#endif  // GEOPIPE_ERROR_HPP_
