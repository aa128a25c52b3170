#pragma once

#include <fftw3.h>

#include "qcorr/types.hpp"

namespace qcorr::detail {

/// In-place batched complex DFT. Planning is serialized (FFTW planners are not
/// thread-safe); execution may run concurrently on distinct buffers.
class FftPlan {
public:
    /// sign: FFTW_FORWARD (e^{-i}) or FFTW_BACKWARD (e^{+i}), unnormalized.
    FftPlan(int n, int sign, int howmany = 1, int stride = 1, int dist = -1);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void execute(cplx* data) const;

private:
    fftw_plan plan_ = nullptr;
};

/// 2-D in-place DFT on a column-major n×m matrix.
class FftPlan2D {
public:
    FftPlan2D(int rows, int cols, int sign);
    ~FftPlan2D();
    FftPlan2D(const FftPlan2D&) = delete;
    FftPlan2D& operator=(const FftPlan2D&) = delete;

    void execute(CMat& m) const;

private:
    fftw_plan plan_ = nullptr;
    int rows_, cols_;
};

/// Signed frequency index of DFT bin k for length n: k for k < n/2, k − n otherwise.
inline int signed_frequency(int k, int n) { return k < n / 2 ? k : k - n; }

/// Band-limited interpolation of a periodic column-major matrix onto a grid twice
/// as fine in both directions: out(2i, 2j) = in(i, j).
CMat upsample2(const CMat& in);

/// Same, along the first index only.
CMat upsample2_rows(const CMat& in);

}  // namespace qcorr::detail
