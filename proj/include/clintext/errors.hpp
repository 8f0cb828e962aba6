// Copyright 2026 The clintext Authors.
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

#ifndef CLINTEXT_ERRORS_HPP
#define CLINTEXT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clintext {

// Malformed UTF-8 input.
class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A rule file or rule definition that cannot be compiled. rule_id() is empty
// when the problem is not attributable to a single rule.
class RuleError : public std::runtime_error {
 public:
  RuleError(std::string rule_id, const std::string& what)
      : std::runtime_error(rule_id.empty() ? what
                                           : "rule '" + rule_id + "': " + what),
        rule_id_(std::move(rule_id)) {}

  const std::string& rule_id() const noexcept { return rule_id_; }

 private:
  std::string rule_id_;
};

// Invalid pipeline configuration (bad stage order, missing rule file, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace clintext

#endif  // CLINTEXT_ERRORS_HPP
