#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "oamfso/common.hpp"

namespace oamfso::fft {

inline constexpr int kForward = FFTW_FORWARD;   // exp(-i k x) kernel
inline constexpr int kBackward = FFTW_BACKWARD; // exp(+i k x) kernel, unnormalized

namespace detail {

// Plans are cached per (rank, size, sign) and reused across buffers.
// FFTW_UNALIGNED keeps a cached plan valid for any array address;
// fftw_execute_dft itself is thread-safe, plan creation is not.
class PlanCache {
public:
    static fftw_plan get(int rank, int n, int sign) {
        static PlanCache cache;
        std::lock_guard<std::mutex> lock(cache.mutex_);
        const auto key = std::make_tuple(rank, n, sign);
        auto it = cache.plans_.find(key);
        if (it != cache.plans_.end()) return it->second;

        std::vector<cd> scratch(static_cast<std::size_t>(rank == 2 ? n * n : n));
        auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = rank == 2 ? fftw_plan_dft_2d(n, n, ptr, ptr, sign, flags)
                                   : fftw_plan_dft_1d(n, ptr, ptr, sign, flags);
        if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
        cache.plans_.emplace(key, plan);
        return plan;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

} // namespace detail

// In-place unnormalized transforms.
inline void transform_2d(cd* data, int n, int sign) {
    fftw_plan plan = detail::PlanCache::get(2, n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, ptr, ptr);
}

inline void transform_1d(cd* data, int n, int sign) {
    fftw_plan plan = detail::PlanCache::get(1, n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, ptr, ptr);
}

} // namespace oamfso::fft
