#pragma once

#include <cstddef>
#include <functional>

namespace netbound {

enum class Execution { serial, parallel };

/// Calls fn(i) for i in [0, n). The parallel path spreads indices over
/// OpenMP threads; the first exception thrown by any call is rethrown after
/// all threads join. The serial path is the reference for testing.
void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn);

int available_threads();

}  // namespace netbound
