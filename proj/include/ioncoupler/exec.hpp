#pragma once

#include <cstdint>
#include <exception>
#include <random>
#include <vector>

namespace ioncoupler {

enum class Exec { serial, parallel };

// Applies IONCOUPLER_THREADS (if set) to the OpenMP runtime. Returns the
// thread count in effect.
int configure_threads_from_env();
int max_threads();

// Independent generator for (seed, stream); streams do not depend on
// execution order, so serial and parallel runs draw identical numbers.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag = 0);

namespace detail {
void run_indexed(long n, Exec exec, void (*thunk)(void*, long), void* ctx);
}

// body(i) for i in [0, n). The first exception (lowest index) is rethrown
// after all iterations finish.
template <class F>
void for_each_index(long n, Exec exec, F&& body) {
  auto thunk = [](void* ctx, long i) { (*static_cast<F*>(ctx))(i); };
  detail::run_indexed(n, exec, thunk, &body);
}

}  // namespace ioncoupler
