#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fharm {

/// Upper bound on the ambient dimension n+1 of target spheres and on the
/// domain dimension m. Per-node temporaries live on the stack up to these sizes.
inline constexpr int kMaxAmbient = 8;
inline constexpr int kMaxDomainDim = 4;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDomainDim, 1>;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxDomainDim>;
using SquareMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDomainDim, kMaxDomainDim>;
using AmbientMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;

/// Invalid user input: unsupported dimension, parameter outside a family, bad config.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (wrong field length, node outside a chart, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A numerical check failed (non-SPD metric, cross-check mismatch, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required hypothesis of a computation does not hold (e.g. map not F-harmonic).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double pairwise_sum_range(const double* data, std::size_t n)
{
    constexpr std::size_t kLeaf = 16;
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}

} // namespace detail

/// Sum with a fixed binary reduction tree. The result depends only on the
/// values and their order, never on how they were produced.
inline double pairwise_sum(std::span<const double> values)
{
    return detail::pairwise_sum_range(values.data(), values.size());
}

/// Worker count from FHARM_THREADS, falling back to the hardware concurrency.
inline unsigned thread_count()
{
    if (const char* env = std::getenv("FHARM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(std::min<long>(v, 256));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; the caller reduces afterwards, so results are schedule independent.
/// The first exception (by worker order) is rethrown after all workers join.
/// A worker is started per grain indices at most.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t grain = 4096)
{
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(thread_count(), std::max<std::size_t>(1, n / std::max<std::size_t>(1, grain))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back([lo, hi, w, &body, &errors] {
                try {
                    for (std::size_t i = lo; i < hi; ++i)
                        body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace fharm
