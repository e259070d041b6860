#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace heatpat {

/// distance = 1 - max_w NCC_w(x, y); `shift` is the lag w - (m - 1) of the
/// maximum, so that align(y, shift) lines y up with x.
struct SbdResult {
  double distance = 0.0;
  int shift = 0;
  bool operator==(const SbdResult&) const = default;
};

/// Smallest n >= target whose prime factors are all <= 5.
std::size_t fast_fft_size(std::size_t target);

namespace detail {
struct FftPlans;
}

/// FFT-backed cross-correlation for sequences of one fixed length. Spectra
/// can be computed once per sequence and reused across many comparisons.
class SbdEngine {
 public:
  struct Spectrum {
    std::vector<double> values;
    std::vector<std::complex<double>> bins;
    double energy = 0.0;  // sum of squares
    double norm = 0.0;
  };

  explicit SbdEngine(std::size_t length);

  std::size_t length() const { return length_; }
  std::size_t fft_size() const { return fft_size_; }

  /// Throws ZeroNormInput for an all-zero sequence, ShapeError on length mismatch.
  Spectrum transform(std::span<const double> x) const;

  /// Coefficient-normalised cross-correlation, 2m - 1 entries; entry w holds
  /// lag w - (m - 1).
  std::vector<double> ncc(const Spectrum& x, const Spectrum& y) const;

  SbdResult sbd(const Spectrum& x, const Spectrum& y) const;

 private:
  std::size_t length_;
  std::size_t fft_size_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

std::vector<double> ncc_sequence(std::span<const double> x, std::span<const double> y);

SbdResult sbd(std::span<const double> x, std::span<const double> y);

/// Zero-padded shift of y by `shift` positions (positive moves right),
/// truncated to the input length. Throws ShiftOutOfRange when |shift| >= m.
std::vector<double> align(std::span<const double> y, int shift);

}  // namespace heatpat
