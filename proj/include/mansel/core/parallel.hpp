#pragma once

#include <cstddef>
#include <functional>

namespace mansel {

/// Runs fn(i) for i in [0, n). Splits the range over worker threads when
/// n is large enough; outputs must be written to disjoint slots so the
/// result is identical to the sequential order.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace mansel
