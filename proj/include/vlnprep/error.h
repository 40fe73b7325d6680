//
// Copyright 2026 The vlnprep Authors
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

#ifndef VLNPREP_ERROR_H_
#define VLNPREP_ERROR_H_

#include <stdexcept>
#include <string>

namespace vlnprep {

// Raised for bad input data: malformed files, invariant violations,
// unreachable goals. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Raised for malformed command lines. The CLI maps it to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vlnprep

#endif  // VLNPREP_ERROR_H_
