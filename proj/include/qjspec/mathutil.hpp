#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

namespace qjspec {

// Unit-area Lorentzian of the given FWHM evaluated at nu.
inline double lorentzian_unit_area(double nu, double fwhm) {
    const double half = 0.5 * fwhm;
    return half / (M_PI * (nu * nu + half * half));
}

// Peak-normalized Lorentzian, value 1 at nu = 0.
inline double lorentzian_peak_norm(double nu, double fwhm) {
    const double x = 2.0 * nu / fwhm;
    return 1.0 / (1.0 + x * x);
}

// Pairwise (cascade) summation; result independent of any segment-level
// parallel schedule because the reduction tree is fixed by index.
double pairwise_sum(const double* data, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }
inline double pairwise_sum(const Eigen::ArrayXd& a) {
    return pairwise_sum(a.data(), static_cast<std::size_t>(a.size()));
}

// Adaptive Simpson quadrature to the requested absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol);

}  // namespace qjspec
