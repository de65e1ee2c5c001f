#pragma once

#include <cstddef>
#include <vector>

namespace kwsum {

// Dense row-major matrix of doubles. Vectors are plain std::vector<double>.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double* row(int r) { return a.data() + static_cast<size_t>(r) * static_cast<size_t>(cols); }
    const double* row(int r) const {
        return a.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
    }
    double& operator()(int r, int c) {
        return a[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
    }
    double operator()(int r, int c) const {
        return a[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
    }
    void zero() { a.assign(a.size(), 0.0); }
};

using Vec = std::vector<double>;

// out[t] = W * in[t] + b for every row t. W is [out_dim x in_dim].
inline void linear_forward(const Mat& in, const Mat& w, const Vec& b, Mat& out) {
    out = Mat(in.rows, w.rows);
    for (int t = 0; t < in.rows; ++t) {
        const double* x = in.row(t);
        double* y = out.row(t);
        for (int o = 0; o < w.rows; ++o) {
            const double* wr = w.row(o);
            double acc = b[static_cast<size_t>(o)];
            for (int i = 0; i < w.cols; ++i) acc += wr[i] * x[i];
            y[o] = acc;
        }
    }
}

// Accumulates input/weight/bias gradients for linear_forward.
inline void linear_backward(const Mat& in, const Mat& w, const Mat& d_out, Mat& d_in, Mat& d_w,
                            Vec& d_b) {
    if (d_in.rows != in.rows || d_in.cols != in.cols) d_in = Mat(in.rows, in.cols);
    for (int t = 0; t < in.rows; ++t) {
        const double* x = in.row(t);
        const double* dy = d_out.row(t);
        double* dx = d_in.row(t);
        for (int o = 0; o < w.rows; ++o) {
            const double g = dy[o];
            if (g == 0.0) continue;
            const double* wr = w.row(o);
            double* dwr = d_w.row(o);
            for (int i = 0; i < w.cols; ++i) {
                dx[i] += g * wr[i];
                dwr[i] += g * x[i];
            }
            d_b[static_cast<size_t>(o)] += g;
        }
    }
}

} // namespace kwsum
