#include "fft.hpp"

#include <mutex>
#include <vector>

namespace qcorr::detail {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

/// Copies the spectrum of length n into a zero-padded spectrum of length 2n,
/// splitting the Nyquist bin symmetrically.
void pad_spectrum(const cplx* in, long in_stride, cplx* out, long out_stride, int n)
{
    const int half = n / 2;
    for (int k = 0; k < half; ++k)
        out[k * out_stride] = in[k * in_stride];
    for (int k = half + 1; k < n; ++k)
        out[(k + n) * out_stride] = in[k * in_stride];
    if (n % 2 == 0) {
        const cplx nyq = 0.5 * in[half * in_stride];
        out[half * out_stride] = nyq;
        out[(half + n) * out_stride] = nyq;
    } else {
        out[half * out_stride] = in[half * in_stride];
    }
}

}  // namespace

FftPlan::FftPlan(int n, int sign, int howmany, int stride, int dist)
{
    if (dist < 0)
        dist = n;
    const long span = static_cast<long>(howmany - 1) * dist + static_cast<long>(n - 1) * stride + 1;
    std::vector<cplx> scratch(static_cast<std::size_t>(span));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_many_dft(1, &n, howmany, as_fftw(scratch.data()), nullptr, stride, dist,
                               as_fftw(scratch.data()), nullptr, stride, dist, sign,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_)
        throw Error("FFTW planning failed");
}

FftPlan::~FftPlan()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
}

void FftPlan::execute(cplx* data) const
{
    fftw_execute_dft(plan_, as_fftw(data), as_fftw(data));
}

FftPlan2D::FftPlan2D(int rows, int cols, int sign) : rows_(rows), cols_(cols)
{
    CMat scratch(rows, cols);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW is row-major; a column-major rows×cols matrix is a row-major cols×rows array.
    plan_ = fftw_plan_dft_2d(cols, rows, as_fftw(scratch.data()), as_fftw(scratch.data()), sign,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_)
        throw Error("FFTW planning failed");
}

FftPlan2D::~FftPlan2D()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
}

void FftPlan2D::execute(CMat& m) const
{
    if (m.rows() != rows_ || m.cols() != cols_)
        throw DimensionError("FftPlan2D: matrix size mismatch");
    fftw_execute_dft(plan_, as_fftw(m.data()), as_fftw(m.data()));
}

CMat upsample2(const CMat& in)
{
    const int n = static_cast<int>(in.rows());
    const int m = static_cast<int>(in.cols());
    CMat spec = in;
    FftPlan2D(n, m, FFTW_FORWARD).execute(spec);
    // pad along rows for each column, then along columns for each padded row
    CMat tmp = CMat::Zero(2 * n, m);
    for (int j = 0; j < m; ++j)
        pad_spectrum(spec.data() + static_cast<long>(j) * n, 1, tmp.data() + static_cast<long>(j) * 2 * n, 1, n);
    CMat out = CMat::Zero(2 * n, 2 * m);
    for (int i = 0; i < 2 * n; ++i)
        pad_spectrum(tmp.data() + i, 2 * n, out.data() + i, 2 * n, m);
    FftPlan2D(2 * n, 2 * m, FFTW_BACKWARD).execute(out);
    out /= static_cast<double>(n) * m;
    return out;
}

CMat upsample2_rows(const CMat& in)
{
    const int n = static_cast<int>(in.rows());
    const int m = static_cast<int>(in.cols());
    CMat spec = in;
    FftPlan(n, FFTW_FORWARD, m, 1, n).execute(spec.data());
    CMat out = CMat::Zero(2 * n, m);
    for (int j = 0; j < m; ++j)
        pad_spectrum(spec.data() + static_cast<long>(j) * n, 1, out.data() + static_cast<long>(j) * 2 * n, 1, n);
    FftPlan(2 * n, FFTW_BACKWARD, m, 1, 2 * n).execute(out.data());
    out /= static_cast<double>(n);
    return out;
}

}  // namespace qcorr::detail
