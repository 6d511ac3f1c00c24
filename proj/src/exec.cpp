#include "ioncoupler/exec.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

#include "ioncoupler/errors.hpp"

namespace ioncoupler {

int configure_threads_from_env() {
  if (const char* v = std::getenv("IONCOUPLER_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || n < 1) {
      throw ConfigError(std::string("IONCOUPLER_THREADS must be a positive integer, got '") + v +
                        "'");
    }
    omp_set_num_threads(static_cast<int>(n));
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

void run_indexed(long n, Exec exec, void (*thunk)(void*, long), void* ctx) {
  std::vector<std::exception_ptr> errors(n > 0 ? static_cast<std::size_t>(n) : 0);
  if (exec == Exec::parallel && n > 1) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      try {
        thunk(ctx, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (long i = 0; i < n; ++i) {
      try {
        thunk(ctx, i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

}  // namespace ioncoupler
