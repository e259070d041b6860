#include "heatpat/sbd.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>

#include "heatpat/error.hpp"

namespace heatpat {

namespace detail {

// FFTW planning is not thread safe; execution through the new-array interface
// is. Plans are created once per size under a lock and shared afterwards.
struct FftPlans {
  explicit FftPlans(std::size_t n) : size(n) {
    const int len = static_cast<int>(n);
    std::vector<double> real(n);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    forward = fftw_plan_dft_r2c_1d(len, real.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse = fftw_plan_dft_c2r_1d(len, cplx, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  // Plans live in the process-wide cache and are only released at exit.
  ~FftPlans() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  static std::mutex& mutex() {
    static std::mutex m;
    return m;
  }

  static std::shared_ptr<const FftPlans> get(std::size_t n) {
    static std::map<std::size_t, std::shared_ptr<const FftPlans>> cache;
    std::lock_guard lock(mutex());
    auto& slot = cache[n];
    if (!slot) slot = std::shared_ptr<const FftPlans>(new FftPlans(n));
    return slot;
  }

  std::size_t size;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

}  // namespace detail

namespace {

constexpr double kTieTolerance = 1e-12;

double direct_lag_product(std::span<const double> x, std::span<const double> y, int lag) {
  // sum_l x[l + lag] * y[l]
  const int m = static_cast<int>(x.size());
  double acc = 0.0;
  const int lo = std::max(0, -lag);
  const int hi = std::min(m, m - lag);
  for (int l = lo; l < hi; ++l) acc += x[static_cast<std::size_t>(l + lag)] * y[static_cast<std::size_t>(l)];
  return acc;
}

}  // namespace

std::size_t fast_fft_size(std::size_t target) {
  if (target <= 1) return 1;
  for (std::size_t n = target;; ++n) {
    std::size_t r = n;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return n;
  }
}

SbdEngine::SbdEngine(std::size_t length)
    : length_(length), fft_size_(0) {
  if (length < 2) throw Error(ErrorCode::ShapeError, "sequences need at least 2 points");
  fft_size_ = fast_fft_size(2 * length - 1);
  plans_ = detail::FftPlans::get(fft_size_);
}

SbdEngine::Spectrum SbdEngine::transform(std::span<const double> x) const {
  if (x.size() != length_) {
    throw Error(ErrorCode::ShapeError, "expected length " + std::to_string(length_) + ", got " +
                                           std::to_string(x.size()));
  }
  Spectrum s;
  s.values.assign(x.begin(), x.end());
  double ss = 0.0;
  for (double v : x) ss += v * v;
  s.energy = ss;
  s.norm = std::sqrt(ss);
  if (!(s.norm > 0.0)) throw Error(ErrorCode::ZeroNormInput, "sequence has zero norm");

  std::vector<double> padded(fft_size_, 0.0);
  std::copy(x.begin(), x.end(), padded.begin());
  s.bins.resize(fft_size_ / 2 + 1);
  fftw_execute_dft_r2c(plans_->forward, padded.data(), reinterpret_cast<fftw_complex*>(s.bins.data()));
  return s;
}

std::vector<double> SbdEngine::ncc(const Spectrum& x, const Spectrum& y) const {
  std::vector<std::complex<double>> product(x.bins.size());
  for (std::size_t i = 0; i < product.size(); ++i) product[i] = x.bins[i] * std::conj(y.bins[i]);
  std::vector<double> circular(fft_size_);
  fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(product.data()), circular.data());

  const double scale = 1.0 / (static_cast<double>(fft_size_) * x.norm * y.norm);
  const std::size_t m = length_;
  std::vector<double> out(2 * m - 1);
  // negative lags wrap to the end of the circular result
  for (std::size_t w = 0; w < m - 1; ++w) out[w] = circular[fft_size_ - (m - 1) + w] * scale;
  for (std::size_t w = m - 1; w < 2 * m - 1; ++w) out[w] = circular[w - (m - 1)] * scale;
  return out;
}

SbdResult SbdEngine::sbd(const Spectrum& x, const Spectrum& y) const {
  const auto seq = ncc(x, y);
  const double best = *std::max_element(seq.begin(), seq.end());
  const int m = static_cast<int>(length_);
  int chosen = 0;
  bool found = false;
  for (int w = 0; w < static_cast<int>(seq.size()); ++w) {
    if (seq[static_cast<std::size_t>(w)] < best - kTieTolerance) continue;
    const int lag = w - (m - 1);
    if (!found || std::abs(lag) < std::abs(chosen) || (std::abs(lag) == std::abs(chosen) && lag < chosen)) {
      chosen = lag;
      found = true;
    }
  }
  // Re-evaluate the winning lag directly; the FFT value carries rounding noise.
  const double value = direct_lag_product(x.values, y.values, chosen) / std::sqrt(x.energy * y.energy);
  return {std::clamp(1.0 - value, 0.0, 2.0), chosen};
}

std::vector<double> ncc_sequence(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeError, "sequence lengths differ");
  SbdEngine engine(x.size());
  return engine.ncc(engine.transform(x), engine.transform(y));
}

SbdResult sbd(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeError, "sequence lengths differ");
  SbdEngine engine(x.size());
  return engine.sbd(engine.transform(x), engine.transform(y));
}

std::vector<double> align(std::span<const double> y, int shift) {
  const int m = static_cast<int>(y.size());
  if (std::abs(shift) >= m) {
    throw Error(ErrorCode::ShiftOutOfRange, "shift " + std::to_string(shift) + " for length " + std::to_string(m));
  }
  std::vector<double> out(y.size(), 0.0);
  for (int i = 0; i < m; ++i) {
    const int src = i - shift;
    if (src >= 0 && src < m) out[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace heatpat
