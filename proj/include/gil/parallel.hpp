/*
 * Copyright 2026 The gil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GIL_PARALLEL_HPP_
#define GIL_PARALLEL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>

namespace gil {

// Logical core count, at least 1.
int DefaultWorkers();

// Runs fn(0..count-1) on up to `workers` threads (inline when workers <= 1).
// Indices are handed out dynamically; the first exception thrown by any
// call is rethrown after all threads join.
void ParallelFor(std::size_t count, int workers,
                 const std::function<void(std::size_t)>& fn);

// SplitMix64 finalizer, used to derive independent seeds.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

// Keeps freed heap memory mapped instead of returning it to the kernel after
// every large tensor. No-op outside glibc.
void TuneAllocator();

}  // namespace gil

#endif  // GIL_PARALLEL_HPP_
