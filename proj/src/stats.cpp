#include "asbf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "asbf/errors.hpp"

namespace asbf {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile requires p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    double lo = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lo + hi);
}

double sign_test_p_greater(int wins, int n) {
    if (n < 0 || wins < 0 || wins > n) throw ValidationError("bad sign test arguments");
    if (n == 0) return 1.0;
    double tail = 0.0;
    for (int i = wins; i <= n; ++i) {
        const double logp = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(n - i + 1.0) - n * std::log(2.0);
        tail += std::exp(logp);
    }
    return std::min(1.0, tail);
}

SlopeFit ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("ols_slope needs >= 2 paired points");
    }
    const int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("ols_slope: degenerate abscissae");
    SlopeFit fit;
    fit.n_points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ssr = 0.0;
        for (int i = 0; i < n; ++i) {
            const double e = y[i] - fit.intercept - fit.slope * x[i];
            ssr += e * e;
        }
        fit.stderr_slope = std::sqrt(ssr / (n - 2) / sxx);
    }
    return fit;
}

}  // namespace asbf
