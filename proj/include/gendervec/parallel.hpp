#pragma once

namespace gendervec {

/// Number of OpenMP workers the kernels will use.
int worker_count();

/// Applies the GENDERVEC_THREADS cap (if set) to the OpenMP runtime;
/// a malformed value is a ConfigError.
/// Returns the resulting worker count.
int apply_thread_limit_from_env();

void set_worker_count(int n);

}  // namespace gendervec
