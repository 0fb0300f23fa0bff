#ifndef NMKDV_DETAIL_FFT_HPP
#define NMKDV_DETAIL_FFT_HPP

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace nmkdv::detail {

// Plan cache. Planning is not thread safe in FFTW so it happens under a lock;
// the new-array execute call is safe from any thread. FFTW_ESTIMATE keeps the
// chosen algorithm (and hence the rounding) identical between runs.
class FftPlans {
public:
    static FftPlans& instance()
    {
        static FftPlans plans;
        return plans;
    }

    fftw_plan get(int n, int direction)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, direction);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        fftw_plan plan = fftw_plan_dft_1d(n, p, p, direction, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

private:
    FftPlans() = default;
    ~FftPlans()
    {
        for (auto& kv : plans_) fftw_destroy_plan(kv.second);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

// in-place unnormalized transforms
inline void fft_forward(std::complex<double>* data, int n)
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(FftPlans::instance().get(n, FFTW_FORWARD), p, p);
}

inline void fft_backward(std::complex<double>* data, int n)
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(FftPlans::instance().get(n, FFTW_BACKWARD), p, p);
}

// signed integer frequency of DFT bin k (Nyquist reported as -n/2)
inline int bin_frequency(int k, int n)
{
    return (2 * k < n) ? k : k - n;
}

// Applies a Fourier multiplier mult(k, n) to data in place.
template<class Mult>
void apply_multiplier(std::complex<double>* data, int n, Mult&& mult)
{
    fft_forward(data, n);
    const double inv = 1.0 / n;
    for (int k = 0; k < n; ++k) data[k] *= mult(k) * inv;
    fft_backward(data, n);
}

} // namespace nmkdv::detail

#endif
