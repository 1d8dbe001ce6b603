// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared constants, small value types, error types and the deterministic
// parallel loop used by every stage of the pipeline.

#ifndef PPC_COMMON_HPP_
#define PPC_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ppc {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double squared_norm(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double squared_distance(const Vec3& a, const Vec3& b) { return squared_norm(a - b); }

// Base of every error thrown by the library. The CLI maps the subclasses to
// distinct exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Arguments outside the mathematical domain of an operation (z <= 0, depth
// beyond the unambiguous range, k out of range, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

// Inconsistent or out-of-range configuration / inputs.
class ValidationError : public Error {
  public:
    using Error::Error;
};

// File could not be opened, or its contents are malformed.
class IoError : public Error {
  public:
    using Error::Error;
};

// Number of worker threads to use when the caller passes 0.
inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs body(i) for i in [0, n) over `workers` threads with a static
// contiguous partition. body must only write to slots owned by i, which makes
// the result independent of the worker count.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &body] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ppc

#endif  // PPC_COMMON_HPP_
