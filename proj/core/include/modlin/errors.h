// Copyright 2026 The modlin Authors. All Rights Reserved.
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

#ifndef MODLIN_ERRORS_H_
#define MODLIN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace modlin {

// Rejected input: a parameter or configuration violates a precondition.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Two quantities that must agree by construction did not.
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what)
      : std::logic_error(what) {}
};

// Training left the stable region (non-finite or runaway loss).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

}  // namespace modlin

#endif  // MODLIN_ERRORS_H_
