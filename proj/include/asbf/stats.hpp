#pragma once
#include <vector>

namespace asbf {

/// Inverse standard normal CDF (Acklam's rational approximation, |err| < 2e-9).
double normal_quantile(double p);

double median(std::vector<double> values);

/// One-sided exact sign test: P(Bin(n, 1/2) >= wins).
double sign_test_p_greater(int wins, int n);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int n_points = 0;
};

/// Ordinary least squares of y on x with the usual slope standard error.
SlopeFit ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace asbf
