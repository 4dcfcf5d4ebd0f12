#include "gendervec/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <string>

#include "gendervec/errors.hpp"

namespace gendervec {

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

int apply_thread_limit_from_env() {
  if (const char* env = std::getenv("GENDERVEC_THREADS"); env && *env) {
    int cap = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, cap);
    if (ec != std::errc() || ptr != end || cap < 1) {
      throw ConfigError(std::string("GENDERVEC_THREADS must be a positive integer, got '") + env +
                        "'");
    }
    if (cap < omp_get_max_threads()) omp_set_num_threads(cap);
  }
  return omp_get_max_threads();
}

}  // namespace gendervec
