#pragma once

// Thin FFTW wrapper. Plans are cached per (shape, direction) and created
// under a lock because the FFTW planner is not thread-safe; execution on
// caller-owned buffers is.

#include <complex>
#include <span>
#include <vector>

namespace kamtorus::detail {

enum class FftDirection { kForward, kBackward };

/// In-place unnormalized N-d DFT, row-major with the last axis fastest.
/// kForward uses exp(-i k.theta), kBackward exp(+i k.theta).
void fft_inplace(std::vector<std::complex<double>>& data, std::span<const int> dims,
                 FftDirection direction);

}  // namespace kamtorus::detail
