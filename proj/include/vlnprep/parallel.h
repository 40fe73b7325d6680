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

#ifndef VLNPREP_PARALLEL_H_
#define VLNPREP_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace vlnprep {

// Worker count: VLNPREP_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t WorkerCount();

// Runs body(i) for every i in [0, n), possibly on several threads. Each index
// is executed exactly once. If any call throws, the exception raised by the
// lowest failing index is rethrown after all workers finish, so the reported
// error does not depend on scheduling.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vlnprep

#endif  // VLNPREP_PARALLEL_H_
