#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "levylab/quad.hpp"

namespace levylab {

using cplx = std::complex<double>;

// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of the order
// parameter over the angle of the quarter circle, one interpolant per real and
// imaginary component.  The interpolant never overshoots its node values, so
// min over nodes of the real part bounds the curve from below.
class OrderParameterCurve {
  public:
    OrderParameterCurve(std::vector<double> angles, std::vector<cplx> values)
        : th_(std::move(angles)), re_(th_.size()), im_(th_.size()) {
        if (th_.size() != values.size())
            throw std::invalid_argument("OrderParameterCurve: size mismatch");
        if (th_.size() < 4) throw std::invalid_argument("OrderParameterCurve: need >= 4 nodes");
        for (std::size_t i = 1; i < th_.size(); ++i)
            if (!(th_[i] > th_[i - 1]))
                throw std::invalid_argument("OrderParameterCurve: angles must increase");
        if (std::abs(th_.front()) > 1e-9 || std::abs(th_.back() - 0.5 * M_PI) > 1e-9)
            throw std::invalid_argument("OrderParameterCurve: grid must span [0, pi/2]");
        for (std::size_t i = 0; i < values.size(); ++i) {
            re_[i] = values[i].real();
            im_[i] = values[i].imag();
        }
        dre_ = slopes(th_, re_);
        dim_ = slopes(th_, im_);
    }

    cplx operator()(double theta) const {
        const double t = std::min(std::max(theta, th_.front()), th_.back());
        std::size_t i = segment(t);
        return {hermite(t, i, re_, dre_), hermite(t, i, im_, dim_)};
    }

    double min_re() const {
        double m = re_[0];
        for (double v : re_) m = std::min(m, v);
        return m;
    }

    // Leave-one-out misfit at the interior nodes: how far a curve built
    // without a node lands from the dropped value.  Large values mean the
    // grid is too coarse for the curvature it is asked to represent.
    double interp_error_estimate() const {
        if (th_.size() < 5) return std::numeric_limits<double>::infinity();
        double worst = 0.0;
        for (std::size_t drop = 1; drop + 1 < th_.size(); ++drop) {
            std::vector<double> a;
            std::vector<cplx> v;
            for (std::size_t i = 0; i < th_.size(); ++i) {
                if (i == drop) continue;
                a.push_back(th_[i]);
                v.push_back({re_[i], im_[i]});
            }
            OrderParameterCurve thin(std::move(a), std::move(v));
            worst = std::max(worst, std::abs(thin(th_[drop]) - cplx{re_[drop], im_[drop]}));
        }
        return worst;
    }

    const std::vector<double>& angles() const { return th_; }

  private:
    static std::vector<double> slopes(const std::vector<double>& x, const std::vector<double>& y) {
        const std::size_t n = x.size();
        std::vector<double> h(n - 1), d(n - 1), m(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            d[i] = (y[i + 1] - y[i]) / h[i];
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        m[0] = edge(h[0], h[1], d[0], d[1]);
        m[n - 1] = edge(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        return m;
    }

    // one-sided three-point slope with the usual shape-preserving clamps
    static double edge(double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    }

    std::size_t segment(double t) const {
        std::size_t lo = 0, hi = th_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (th_[mid] <= t ? lo : hi) = mid;
        }
        return lo;
    }

    double hermite(double t, std::size_t i, const std::vector<double>& y,
                   const std::vector<double>& m) const {
        const double h = th_[i + 1] - th_[i], s = (t - th_[i]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return y[i] * (2 * s3 - 3 * s2 + 1) + h * m[i] * (s3 - 2 * s2 + s) +
               y[i + 1] * (3 * s2 - 2 * s3) + h * m[i + 1] * (s3 - s2);
    }

    std::vector<double> th_, re_, im_, dre_, dim_;
};

// Least-squares smoothing for Monte-Carlo-tabulated order-parameter values:
// fits a low-order Chebyshev series in the arc angle riding on the
// zero-energy shape (cos th + sin th)^{alpha/2} and returns the curve
// through the fitted values.  Raw node estimates carry correlated pool
// noise well above the leave-one-out misfit the moment quadrature accepts,
// so a genuinely smooth curve would otherwise be rejected as too coarse.
inline OrderParameterCurve smoothed_order_parameter_curve(double alpha,
                                                          const std::vector<double>& angles,
                                                          const std::vector<cplx>& values,
                                                          int basis = 6) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("smoothed_order_parameter_curve: alpha in (0,2)");
    if (angles.size() != values.size())
        throw std::invalid_argument("smoothed_order_parameter_curve: size mismatch");
    if (basis < 1) throw std::invalid_argument("smoothed_order_parameter_curve: basis >= 1");
    const std::size_t n = angles.size();
    const int K = basis;
    if (n < static_cast<std::size_t>(K) + 2)
        throw std::invalid_argument("smoothed_order_parameter_curve: need basis + 2 nodes");

    std::vector<std::vector<double>> A(n, std::vector<double>(K));
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::pow(std::cos(angles[i]) + std::sin(angles[i]), 0.5 * alpha);
        const double x = std::min(1.0, std::max(-1.0, 4.0 * angles[i] / M_PI - 1.0));
        double t0 = 1.0, t1 = x;
        for (int j = 0; j < K; ++j) {
            A[i][j] = s * t0;
            const double t2 = 2.0 * x * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
    }
    // normal equations with a complex right-hand side
    std::vector<std::vector<double>> G(K, std::vector<double>(K, 0.0));
    std::vector<cplx> rhs(K, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < K; ++j) {
            rhs[j] += A[i][j] * values[i];
            for (int l = 0; l < K; ++l) G[j][l] += A[i][j] * A[i][l];
        }
    // Gaussian elimination with partial pivoting; the Chebyshev basis keeps
    // the system comfortably conditioned at these sizes
    std::vector<cplx> c(K);
    for (int col = 0; col < K; ++col) {
        int piv = col;
        for (int r = col + 1; r < K; ++r)
            if (std::abs(G[r][col]) > std::abs(G[piv][col])) piv = r;
        if (std::abs(G[piv][col]) < 1e-12)
            throw std::runtime_error("smoothed_order_parameter_curve: singular fit");
        std::swap(G[col], G[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int r = col + 1; r < K; ++r) {
            const double f = G[r][col] / G[col][col];
            for (int j = col; j < K; ++j) G[r][j] -= f * G[col][j];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int row = K - 1; row >= 0; --row) {
        cplx v = rhs[row];
        for (int j = row + 1; j < K; ++j) v -= G[row][j] * c[j];
        c[row] = v / G[row][row];
    }
    std::vector<cplx> fitted(n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < K; ++j) fitted[i] += A[i][j] * c[j];
    return OrderParameterCurve(std::vector<double>(angles), std::move(fitted));
}

namespace detail {

inline void check_alpha(double alpha, const char* who) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument(std::string(who) + ": alpha in (0,2)");
}

// upper limit V with exp(-g V) V^q below e^{-35} at the cut
inline double decay_cut(double g, double q) {
    double V = 35.0 / g;
    for (int it = 0; it < 4; ++it) V = (35.0 + std::max(q, 0.0) * std::log1p(V)) / g;
    return V;
}

inline double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace detail

// One-sided moment integral against the order parameter at angle zero:
//   (1/Gamma(p)) int_0^inf t^{p-1} exp(i t z - t^{alpha/2} gamma1) dt,
// evaluated after the substitution v = t^{alpha/2} that removes the stretched
// exponential.  Im z = 0 is the boundary limit; Im z > 0 makes the identity
// against a fixed-eta population exact.
inline cplx one_sided_moment_integral(double alpha, cplx z, cplx gamma1, int p) {
    detail::check_alpha(alpha, "one_sided_moment_integral");
    if (p < 1) throw std::invalid_argument("one_sided_moment_integral: p >= 1");
    if (p > 60) throw std::invalid_argument("one_sided_moment_integral: p too large");
    if (z.imag() < 0.0)
        throw std::invalid_argument("one_sided_moment_integral: Im z >= 0 required");
    if (!(gamma1.real() > 0.0))
        throw std::invalid_argument("one_sided_moment_integral: Re gamma must be positive");
    const double q = 2.0 * p / alpha;
    const double e = 2.0 / alpha;
    const double V = detail::decay_cut(gamma1.real(), q - 1.0);
    const double scale =
        std::exp(std::log(2.0 / alpha) - std::lgamma(p) + std::lgamma(q) - q * std::log(gamma1.real()));
    const cplx iz = cplx{0.0, 1.0} * z;
    auto f = [&](double v) -> cplx {
        return std::pow(v, q - 1.0) * std::exp(iz * std::pow(v, e) - gamma1 * v);
    };
    auto r = integrate(f, 0.0, V, scale * 1e-13, 1e-11);
    if (!r.converged)
        throw std::runtime_error("one_sided_moment_integral: quadrature did not converge");
    return 2.0 / alpha * std::exp(-std::lgamma(p)) * r.value;
}

// Two-sided moment integral over the quarter plane:
//   (1/(Gamma(a)Gamma(b))) int t^{a-1} s^{b-1} exp(i t z - i s conj(z))
//     exp(-(t^2+s^2)^{alpha/4} gamma(atan2(s,t))) dt ds,   b = p - a,
// by nested adaptive quadrature; the curve supplies gamma on the quarter
// circle.
inline cplx two_sided_moment_integral(double alpha, cplx z, const OrderParameterCurve& gamma,
                                      int p, int a) {
    detail::check_alpha(alpha, "two_sided_moment_integral");
    if (p < 2 || a < 1 || a > p - 1)
        throw std::invalid_argument("two_sided_moment_integral: need 1 <= a <= p-1, p >= 2");
    if (p > 60) throw std::invalid_argument("two_sided_moment_integral: p too large");
    if (z.imag() < 0.0)
        throw std::invalid_argument("two_sided_moment_integral: Im z >= 0 required");
    const double gmin = gamma.min_re();
    if (!(gmin > 0.0))
        throw std::runtime_error("two_sided_moment_integral: Re gamma must be positive on the arc");
    if (gamma.interp_error_estimate() > 1e-3)
        throw std::runtime_error("two_sided_moment_integral: order-parameter grid too coarse");
    const int b = p - a;
    const double half = 0.5 * alpha;
    // box cut: r^{alpha/2} gmin ~ 35 plus the polynomial correction
    double T = std::pow(35.0 / gmin, 2.0 / alpha);
    for (int it = 0; it < 4; ++it)
        T = std::pow((35.0 + std::max(p - 2, 0) * std::log1p(T)) / gmin, 2.0 / alpha);
    const double scale = std::exp(std::log(M_PI / alpha) + std::lgamma(2.0 * p / alpha) -
                                  (2.0 * p / alpha) * std::log(gmin) - std::lgamma(a) -
                                  std::lgamma(b));
    const double inner_abs = scale * 1e-12 / std::max(T, 1.0);
    const cplx iz = cplx{0.0, 1.0} * z;
    const cplx izbar = cplx{0.0, -1.0} * std::conj(z);
    bool inner_ok = true;
    auto outer = [&](double t) -> cplx {
        auto inner = [&](double s) -> cplx {
            const double r2 = t * t + s * s;
            const cplx g = gamma(std::atan2(s, t));
            return std::pow(s, b - 1.0) * std::exp(izbar * s - std::pow(r2, 0.25 * alpha) * g);
        };
        auto ri = integrate(inner, 0.0, T, inner_abs, 1e-9, 2000);
        if (!ri.converged) inner_ok = false;
        return std::pow(t, a - 1.0) * std::exp(iz * t) * ri.value;
    };
    auto r = integrate(outer, 0.0, T, scale * 1e-11, 5e-9, 2000);
    if (!r.converged || !inner_ok)
        throw std::runtime_error("two_sided_moment_integral: quadrature did not converge");
    return std::exp(-std::lgamma(a) - std::lgamma(b)) * r.value;
}

// p-th moment of Im R: the binomial combination of the one- and two-sided
// integrals.  The result is real up to quadrature error; a non-negligible
// imaginary part signals an inconsistent curve.
inline double im_resolvent_moment(double alpha, cplx z, const OrderParameterCurve& gamma,
                                  int p) {
    const cplx X = one_sided_moment_integral(alpha, z, gamma(0.0), p);
    cplx sum = X + std::conj(X);
    for (int a = 1; a < p; ++a)
        sum += detail::binom(p, a) * two_sided_moment_integral(alpha, z, gamma, p, a);
    const cplx m = std::ldexp(1.0, -p) * sum;
    if (std::abs(m.imag()) > 1e-6 * std::max(1.0, std::abs(m.real())))
        throw std::runtime_error("im_resolvent_moment: combination failed to be real");
    return m.real();
}

// Closed forms at the band center -----------------------------------------

// gamma at energy zero: kappa (cos th + sin th)^{alpha/2} with
// kappa^2 = Gamma(1-alpha/2)/Gamma(1+alpha/2).
inline double zero_energy_gamma(double alpha, double theta) {
    detail::check_alpha(alpha, "zero_energy_gamma");
    const double kappa =
        std::exp(0.5 * (std::lgamma(1.0 - 0.5 * alpha) - std::lgamma(1.0 + 0.5 * alpha)));
    return kappa * std::pow(std::cos(theta) + std::sin(theta), 0.5 * alpha);
}

// E[(Im R)^p] at energy zero: (2/(alpha Gamma(p))) Gamma(2p/alpha) kappa^{-2p/alpha}.
inline double zero_energy_moment(double alpha, int p) {
    detail::check_alpha(alpha, "zero_energy_moment");
    if (p < 1) throw std::invalid_argument("zero_energy_moment: p >= 1");
    const double lkappa2 = std::lgamma(1.0 - 0.5 * alpha) - std::lgamma(1.0 + 0.5 * alpha);
    const double lv = std::log(2.0 / alpha) - std::lgamma(p) + std::lgamma(2.0 * p / alpha) -
                      (p / alpha) * lkappa2;
    if (lv > 700.0) throw std::overflow_error("zero_energy_moment: overflow");
    return std::exp(lv);
}

namespace detail {
// log E[U^p] for the normalized overlap factor U at the band center,
// written so that the p = 1 case cancels to exactly zero.
inline double log_u_moment(double alpha, int p) {
    const double l2a = std::log(2.0 / alpha) + std::lgamma(2.0 / alpha);  // log Gamma(1+2/alpha)
    return std::log(2.0 / alpha) + std::lgamma(2.0 * p / alpha) - std::lgamma(p) - p * l2a;
}
}  // namespace detail

// E[U^p] with U the band-center overlap factor normalized to mean one.
inline double u_moment(double alpha, int p) {
    detail::check_alpha(alpha, "u_moment");
    if (p < 1) throw std::invalid_argument("u_moment: p >= 1");
    const double lv = detail::log_u_moment(alpha, p);
    if (lv > 700.0) throw std::overflow_error("u_moment: overflow");
    return std::exp(lv);
}

// p-th moment of the limiting law of N u_k(i)^2 for bulk eigenvectors at the
// spectral median: the chi-square factor contributes (2p-1)!!.
inline double median_moment(double alpha, int p) {
    detail::check_alpha(alpha, "median_moment");
    if (p < 1) throw std::invalid_argument("median_moment: p >= 1");
    double ldf = 0.0;
    for (int k = 2; k <= p; ++k) ldf += std::log(2.0 * k - 1.0);
    const double lv = ldf + detail::log_u_moment(alpha, p);
    if (lv > 700.0) throw std::overflow_error("median_moment: overflow");
    return std::exp(lv);
}

// Moment growth rate log m_p / (p log p).  Below 2 the moment problem is
// determinate (Carleman), which is what licenses distribution-level
// comparisons against the predicted law for alpha > 1.
inline double moment_growth_rate(double alpha, int p) {
    detail::check_alpha(alpha, "moment_growth_rate");
    if (p < 2) throw std::invalid_argument("moment_growth_rate: p >= 2");
    double ldf = 0.0;
    for (int k = 2; k <= p; ++k) ldf += std::log(2.0 * k - 1.0);
    return (ldf + detail::log_u_moment(alpha, p)) / (p * std::log(static_cast<double>(p)));
}

// Predicted limiting covariances of squared-overlap pairs: entries of one
// eigenvector decouple; entries of neighboring eigenvectors at the same site
// share their local factor.
struct JointPredictions {
    double same_vector_cov = 0.0;
    double neighbor_cov = 0.0;
};

inline JointPredictions joint_predictions(double alpha) {
    return {0.0, u_moment(alpha, 2) - 1.0};
}

// Row of a moment-prediction report.
struct MomentRow {
    std::string label;
    int p = 0;
    int a = -1;  // two-sided split when >= 0
    double theory = 0.0;
    std::string method;
};

inline std::vector<MomentRow> limit_moment_table(double alpha, double E,
                                                 const OrderParameterCurve& gamma, int pmax) {
    std::vector<MomentRow> rows;
    for (int p = 1; p <= pmax; ++p)
        rows.push_back({"im_resolvent_moment", p, -1, im_resolvent_moment(alpha, E, gamma, p),
                        "order-parameter quadrature"});
    if (E == 0.0) {
        for (int p = 1; p <= pmax; ++p)
            rows.push_back(
                {"im_resolvent_moment", p, -1, zero_energy_moment(alpha, p), "closed form"});
        for (int p = 1; p <= std::min(pmax, 4); ++p)
            rows.push_back({"overlap_moment", p, -1, median_moment(alpha, p), "closed form"});
    }
    return rows;
}

}  // namespace levylab
