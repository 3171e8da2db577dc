#pragma once

// Index-parallel execution of independent work items. Each item writes only
// its own output slot, so the serial and OpenMP paths produce identical
// results; the serial path is kept as the reference implementation.

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace covtest {

enum class Execution { serial, parallel };

/// Calls fn(i) for i in [0, n) and returns the results in index order.
/// The first exception (lowest index) is rethrown after all items finish.
template <class Record, class Fn>
std::vector<Record> map_indexed(std::size_t n, Fn&& fn, Execution exec) {
    std::vector<Record> out(n);
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            out[idx] = fn(idx);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

/// Calls fn(i) for i in [0, n) with no result; same error contract as map_indexed.
template <class Fn>
void for_indexed(std::size_t n, Fn&& fn, Execution exec) {
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            fn(idx);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

inline int max_threads() { return omp_get_max_threads(); }

}  // namespace covtest
