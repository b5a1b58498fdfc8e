// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace bhfr {

/// Worker count used when a call does not specify one (0 = hardware concurrency).
void set_default_threads(unsigned threads);
unsigned default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Each index is handled exactly once; bodies must write only to slots owned
/// by their index, which makes results independent of the worker count.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace bhfr
