/* Copyright 2026 The scomp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace scomp::numeric {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Standard normal CDF, accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// Standard normal quantile via the inverse error function.
double normal_quantile(double p);

// Antiderivative of the standard normal CDF: int_{-inf}^z Phi(t) dt.
inline double normal_cdf_integral(double z) {
  return z * normal_cdf(z) + normal_pdf(z);
}

// Adaptive Gauss-Kronrod integral of f over [a, b]; `breaks` are interior
// points where f may have kinks or jumps. Infinite limits are not supported.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breaks = {}, double tol = 1e-12,
                 double* error_estimate = nullptr);

// Iterated 2D integral over [ax, bx] x [ay, by].
double integrate2d(const std::function<double(double, double)>& f, double ax,
                   double bx, double ay, double by,
                   std::span<const double> xbreaks = {},
                   std::span<const double> ybreaks = {}, double tol = 1e-9);

// Linear-interpolated quantile (type 7) of unsorted data.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

}  // namespace scomp::numeric
