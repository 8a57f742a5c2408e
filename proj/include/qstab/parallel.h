// Copyright 2026 The qstab Authors
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

#ifndef QSTAB_PARALLEL_H_
#define QSTAB_PARALLEL_H_

#include <functional>

namespace qstab {

// Worker count: QSTAB_WORKERS if set and positive, else the hardware count.
int DefaultWorkerCount();

// Runs fn(0..n-1) on up to `workers` threads. Indices are claimed
// dynamically, so fn must not depend on which thread runs it. The exception
// from the lowest failing index is rethrown after all threads join.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

}  // namespace qstab

#endif  // QSTAB_PARALLEL_H_
