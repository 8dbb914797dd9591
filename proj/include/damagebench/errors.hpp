//------------------------------------------------------------------------------
//
//   Copyright 2026 The damagebench Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace damagebench {

// Bad or inconsistent configuration; the CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be processed, such as malformed records or unreadable files.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Statistic undefined for the given input (empty sample, constant vector).
class StatsError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Image bytes that could not be decoded or encoded.
class ImageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace damagebench
