#pragma once

#include <exception>
#include <vector>

namespace gridad {

/// Every batch kernel has a serial reference path and an OpenMP path that
/// must produce identical results.
enum class Execution { Serial, Parallel };

/// Runs body(i) for i in [0, count). Exceptions are captured per index and
/// the lowest-index one is rethrown, so failures do not depend on scheduling.
template <class Body>
void for_each_index(int count, Execution exec, Body&& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count > 0 ? count : 0));
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        for (int i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int max_threads();
/// Caps the OpenMP team size for later parallel regions; n < 1 is ignored.
void set_max_threads(int n);

}  // namespace gridad
