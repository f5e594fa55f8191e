// Copyright 2026 The STRelay Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRELAY_INTERVAL_H_
#define STRELAY_INTERVAL_H_

namespace strelay {

// Discretization of the future context. Temporal bins are dt hours wide
// (M of them); spatial bins are dd kilometers wide (N of them). The last
// bin of each kind absorbs everything beyond the covered range.
struct IntervalSpec {
  double dt = 1.0;
  int M = 24;
  double dd = 1.0;
  int N = 30;

  // Throws UsageError when a field is out of range.
  void validate() const;
};

enum class IntervalKind { kTemporal, kSpatial };

struct IntervalIndex {
  IntervalKind kind = IntervalKind::kTemporal;
  int index = 0;

  friend bool operator==(const IntervalIndex&, const IntervalIndex&) = default;
};

}  // namespace strelay

#endif  // STRELAY_INTERVAL_H_
