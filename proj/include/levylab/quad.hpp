#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace levylab {

// Adaptive Gauss-Kronrod 15(7) for complex-valued integrands of a real
// variable.  Bisects the worst segment until the summed error estimate meets
// max(abstol, reltol*|I|); integrable endpoint singularities converge through
// geometric subdivision.
struct QuadResult {
    std::complex<double> value{0.0, 0.0};
    double abserr = 0.0;
    int segments = 0;
    bool converged = true;
};

namespace quad_detail {

// QUADPACK qk15 nodes/weights on [-1,1]; node 0 and the symmetric pairs.
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
std::pair<std::complex<double>, double> kronrod15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::complex<double> resk{0.0, 0.0}, resg{0.0, 0.0};
    for (int j = 0; j < 7; ++j) {
        const std::complex<double> fv = f(c - h * xgk[j]) + f(c + h * xgk[j]);
        resk += wgk[j] * fv;
        if (j % 2 == 1) resg += wg[j / 2] * fv;  // odd Kronrod nodes are the Gauss nodes
    }
    const std::complex<double> f0 = f(c);
    resk += wgk[7] * f0;
    resg += wg[3] * f0;
    const double err = std::abs(resk - resg) * h;
    return {resk * h, err};
}

struct Segment {
    double a, b, err;
    std::complex<double> val;
    bool operator<(const Segment& o) const { return err < o.err; }
};

}  // namespace quad_detail

template <class F>
QuadResult integrate(F&& f, double a, double b, double abstol = 1e-12,
                     double reltol = 1e-10, int max_segments = 4000) {
    using namespace quad_detail;
    std::vector<Segment> heap;
    auto [v, e] = kronrod15(f, a, b);
    heap.push_back({a, b, e, v});
    QuadResult res;
    for (;;) {
        std::complex<double> total{0.0, 0.0};
        double err = 0.0;
        for (const auto& s : heap) {
            total += s.val;
            err += s.err;
        }
        res.value = total;
        res.abserr = err;
        res.segments = static_cast<int>(heap.size());
        if (err <= std::max(abstol, reltol * std::abs(total))) return res;
        if (static_cast<int>(heap.size()) >= max_segments) {
            res.converged = false;
            return res;
        }
        std::pop_heap(heap.begin(), heap.end());
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        auto [v1, e1] = kronrod15(f, worst.a, mid);
        auto [v2, e2] = kronrod15(f, mid, worst.b);
        heap.push_back({worst.a, mid, e1, v1});
        std::push_heap(heap.begin(), heap.end());
        heap.push_back({mid, worst.b, e2, v2});
        std::push_heap(heap.begin(), heap.end());
    }
}

// Least-squares line y = c0 + c1 x; returns (intercept, slope).
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    return {(sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

}  // namespace levylab
