#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace mglue {

int max_threads();
void set_threads(int n);

/// out[i] = f(i) for i < n, spread over OpenMP threads. Results land in
/// index order, so the output never depends on the thread count. The first
/// exception (lowest index) is rethrown after the loop.
template <typename R, typename F>
std::vector<R> map_indexed(std::size_t n, F&& f) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> err(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      err[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace serial {

template <typename R, typename F>
std::vector<R> map_indexed(std::size_t n, F&& f) {
  std::vector<R> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

}  // namespace serial

}  // namespace mglue
