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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scomp/densities.hpp"

namespace scomp {

// |F{G}(omega)| for the product noise model; omega has noise.dim entries.
double char_fn(const NoiseModel& noise, std::span<const double> omega);

// inf_{|omega| <= alpha} |F{G}(omega)|: exp(-(sigma alpha)^2 / 2) for Gaussian
// noise, (1 + (b alpha)^2 / d)^{-d} for Laplace.
double b_lower(const NoiseModel& noise, double alpha, std::size_t dim);

// (2/pi) int_0^h sin^2(u)/u^2 du.
double zeta(double h);

enum class CertFamily { kGaussianIso, kKMixUniform1D, kKMixUniformD };

struct CertificateFamily {
  CertFamily kind = CertFamily::kGaussianIso;
  double sigma0 = 1.0;   // Gaussian
  std::size_t dim = 1;
  double T = 1.0;        // uniform mixtures
  std::size_t k = 1;
  double epsilon = 0.0;  // ||p - q||_2 the uniform certificates are evaluated at
  double c = 2.0;        // constant of the d-dimensional uniform certificate

  std::string name() const;
  nlohmann::json to_json() const;
  static CertificateFamily from_json(const nlohmann::json& j);
};

struct LowFreqCertificate {
  double alpha = 0.0;
  double xi = 0.0;
  std::optional<double> epsilon;
  std::string family;
  bool verified = false;
  std::optional<double> measured_ratio;

  nlohmann::json to_json() const;
};

// Smallest alpha accepted by the Gaussian certificate.
double gaussian_certificate_threshold(double sigma0, std::size_t dim);

// Closed-form (alpha, xi). Throws kInvalidArgument below the Gaussian
// validity threshold.
LowFreqCertificate xi_certificate(const CertificateFamily& family, double alpha);

struct LowFreqOptions {
  // 0 picks 2^16 points in 1D and 1024 per axis in 2D.
  std::size_t grid_size = 0;
  // Zero-padding factor of the transform; 0 picks 16 in 1D and 2 in 2D.
  std::size_t padding = 0;
  // Largest energy fraction allowed in the top decade of resolved frequencies.
  double nyquist_tolerance = 1e-3;
  // Largest relative gap between quadrature and DFT energies.
  double parseval_tolerance = 0.01;
};

struct LowFreqMeasurement {
  double ratio = 0.0;
  double spatial_energy = 0.0;   // ||p - q||_2^2 by quadrature
  double spectral_energy = 0.0;  // same from the DFT
  double top_decade_fraction = 0.0;
  std::size_t grid_size = 0;
};

// One transform, high-band shares at several cutoffs.
struct LowFreqProfile {
  std::vector<double> alphas;
  std::vector<double> ratios;
  double spatial_energy = 0.0;
  double spectral_energy = 0.0;
  double top_decade_fraction = 0.0;
  std::size_t grid_size = 0;
};

// High-band share (2 pi)^-d int_{|w| >= alpha} |P - Q|^2 / ||p - q||^2 from a
// DFT of p - q over the joint support. d <= 2. Throws kInvalidArgument when
// p == q or the grid fails the Nyquist or Parseval check.
LowFreqMeasurement lowfreq_ratio(const Density& p, const Density& q,
                                 double alpha, const LowFreqOptions& options = {});
LowFreqProfile lowfreq_profile(const Density& p, const Density& q,
                               const std::vector<double>& alphas,
                               const LowFreqOptions& options = {});

// epsilon * min over certs of 24 / sqrt(B_G(alpha) (1 - xi)).
double l2_error_bound(double epsilon, const NoiseModel& noise,
                      const std::vector<LowFreqCertificate>& certs);

enum class EnvelopeKind { kConstantOnBox, kGaussian };

// kConstantOnBox: g = c on a set of volume V.
// kGaussian:      g(x) = C1 exp(-gamma |x|^2) on R^d.
struct Envelope {
  EnvelopeKind kind = EnvelopeKind::kConstantOnBox;
  double c = 1.0;
  double volume = 1.0;
  double C1 = 1.0;
  double gamma = 1.0;
  std::size_t dim = 1;

  double sup() const;
  double l1() const;
  double l2_squared() const;
  // int min(level, g)^2 and int min(level, g).
  double clipped_energy(double level) const;
  double clipped_mass(double level) const;

  nlohmann::json to_json() const;
  static Envelope from_json(const nlohmann::json& j);
};

struct WaterFillResult {
  double level = 0.0;
  double l1_bound = 0.0;
  // A = {g >= level}: the whole box, or the ball of this radius.
  double region_radius = 0.0;
  std::string region;

  nlohmann::json to_json() const;
};

// Solves int min(level, g)^2 = eps^2 by bisection (relative tolerance
// 1e-10). Throws kInfeasible when eps^2 > int g^2.
WaterFillResult waterfill(const Envelope& envelope, double epsilon_l2);

enum class TVBoundKind { kBoundedSupport, kSubGaussian };

struct TVBound {
  TVBoundKind kind = TVBoundKind::kBoundedSupport;
  double R = 1.0;
  std::size_t dim = 1;
  double C1 = 1.0;
  double gamma = 1.0;
  std::optional<double> C2;  // required for kSubGaussian
};

// (2R)^{d/2} eps, or C2 eps log(1/eps)^{d/2}.
double tv_from_l2(const TVBound& bound, double epsilon_l2);

// Least-squares fit of log(l1_bound / eps) = log C + p log log(1/eps) over
// the given eps values.
struct LogFactorFit {
  double C = 0.0;
  double exponent = 0.0;
};
LogFactorFit fit_log_factor(const Envelope& envelope,
                            const std::vector<double>& epsilons);

// Smallest C2 with l1_bound(eps) <= C2 eps log(1/eps)^{d/2} on the given
// eps values (all < 1).
double fit_subgaussian_c2(const Envelope& envelope,
                          const std::vector<double>& epsilons);

}  // namespace scomp
