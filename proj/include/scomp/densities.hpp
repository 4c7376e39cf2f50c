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
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"
#include "scomp/points.hpp"
#include "scomp/rng.hpp"

namespace scomp {

enum class DensityKind { kIsoGaussian, kUniformBox, kMixture, kConvolved };

// Axis-aligned box; used for effective supports and quadrature ranges.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Evaluable, sampleable probability density on R^d. Implementations are
// immutable after construction and safe to share across threads.
class Density {
 public:
  virtual ~Density() = default;

  virtual DensityKind kind() const = 0;
  virtual std::size_t dim() const = 0;

  // Unchecked pdf; callers outside the library go through pdf_eval().
  virtual double density(std::span<const double> x) const = 0;
  virtual void draw(SeededRng& rng, std::span<double> out) const = 0;

  // False when the pdf has no supported evaluation route (sampling still works).
  virtual bool evaluable() const { return true; }

  // Closed-form CDF; only 1D densities may provide one.
  virtual bool has_cdf() const { return false; }
  virtual double cdf(double x) const;

  // Box outside which the remaining mass is below ~1e-12.
  virtual Box effective_support() const = 0;

  // Coordinates along `axis` where the pdf jumps or kinks.
  virtual void breakpoints(std::size_t axis, std::vector<double>& out) const;

  // Length scale below which the pdf has no sign-changing structure;
  // +inf for piecewise-constant densities.
  virtual double smoothness_scale() const = 0;

  virtual nlohmann::json to_json() const = 0;
};

using DensityHandle = std::shared_ptr<const Density>;

// N(mean, sigma^2 I).
class IsoGaussian final : public Density {
 public:
  IsoGaussian(std::vector<double> mean, double sigma);

  const std::vector<double>& mean() const { return mean_; }
  double sigma() const { return sigma_; }

  DensityKind kind() const override { return DensityKind::kIsoGaussian; }
  std::size_t dim() const override { return mean_.size(); }
  double density(std::span<const double> x) const override;
  void draw(SeededRng& rng, std::span<double> out) const override;
  bool has_cdf() const override { return mean_.size() == 1; }
  double cdf(double x) const override;
  Box effective_support() const override;
  double smoothness_scale() const override { return sigma_; }
  nlohmann::json to_json() const override;

 private:
  std::vector<double> mean_;
  double sigma_;
  double log_norm_;
};

// Uniform on prod [lower_i, upper_i] with every width >= min_width.
class UniformBox final : public Density {
 public:
  UniformBox(std::vector<double> lower, std::vector<double> upper,
             double min_width);

  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double min_width() const { return min_width_; }
  double volume() const { return volume_; }

  DensityKind kind() const override { return DensityKind::kUniformBox; }
  std::size_t dim() const override { return lower_.size(); }
  double density(std::span<const double> x) const override;
  void draw(SeededRng& rng, std::span<double> out) const override;
  bool has_cdf() const override { return lower_.size() == 1; }
  double cdf(double x) const override;
  Box effective_support() const override { return {lower_, upper_}; }
  void breakpoints(std::size_t axis, std::vector<double>& out) const override;
  double smoothness_scale() const override;
  nlohmann::json to_json() const override;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  double min_width_;
  double volume_;
};

// sum_i w_i f_i with |sum w - 1| <= 1e-12.
class Mixture final : public Density {
 public:
  Mixture(std::vector<double> weights, std::vector<DensityHandle> components);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<DensityHandle>& components() const { return components_; }

  DensityKind kind() const override { return DensityKind::kMixture; }
  std::size_t dim() const override { return components_.front()->dim(); }
  double density(std::span<const double> x) const override;
  void draw(SeededRng& rng, std::span<double> out) const override;
  bool evaluable() const override;
  bool has_cdf() const override;
  double cdf(double x) const override;
  Box effective_support() const override;
  void breakpoints(std::size_t axis, std::vector<double>& out) const override;
  double smoothness_scale() const override;
  nlohmann::json to_json() const override;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<DensityHandle> components_;
};

enum class NoiseKind { kGaussian, kLaplace };

// Product noise with i.i.d. symmetric coordinates. scale == 0 is accepted as
// the degenerate point mass at the origin (the zero-noise limit).
struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  double scale = 1.0;
  std::size_t dim = 1;

  static NoiseModel gaussian(double sigma, std::size_t dim = 1);
  static NoiseModel laplace(double b, std::size_t dim = 1);

  bool degenerate() const { return scale == 0.0; }

  // Per-coordinate pdf, CDF and int_{-inf}^z CDF(t) dt.
  double pdf1(double z) const;
  double cdf1(double z) const;
  double cdf_integral1(double z) const;
  double draw1(SeededRng& rng) const;
  // Half-width holding all but ~1e-12 of a coordinate's mass.
  double span() const;

  nlohmann::json to_json() const;
  static NoiseModel from_json(const nlohmann::json& j);

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

// Base density convolved with additive noise (f * G). Either a closed-form
// smoothed box or a numerically smoothed composite.
class Convolved : public Density {
 public:
  Convolved(DensityHandle base, NoiseModel noise);

  const DensityHandle& base() const { return base_; }
  const NoiseModel& noise() const { return noise_; }

  DensityKind kind() const override { return DensityKind::kConvolved; }
  std::size_t dim() const override { return base_->dim(); }
  void draw(SeededRng& rng, std::span<double> out) const override;
  Box effective_support() const override;
  double smoothness_scale() const override;
  nlohmann::json to_json() const override;

 protected:
  DensityHandle base_;
  NoiseModel noise_;
};

// UniformBox * noise, evaluated per coordinate with noise CDF differences.
class SmoothedBox final : public Convolved {
 public:
  SmoothedBox(std::shared_ptr<const UniformBox> box, NoiseModel noise);

  const UniformBox& box() const { return *box_; }

  double density(std::span<const double> x) const override;
  bool has_cdf() const override { return box_->dim() == 1; }
  double cdf(double x) const override;

 private:
  std::shared_ptr<const UniformBox> box_;
};

// IsoGaussian * Laplace noise: per-coordinate normal-Laplace pdf, any d.
class LaplaceSmoothedGaussian final : public Convolved {
 public:
  LaplaceSmoothedGaussian(std::shared_ptr<const IsoGaussian> gauss,
                          NoiseModel noise);

  double density(std::span<const double> x) const override;
  bool has_cdf() const override { return gauss_->dim() == 1; }
  double cdf(double x) const override;

 private:
  std::shared_ptr<const IsoGaussian> gauss_;
};

// Any other composite; pdf by quadrature over the noise, only for d <= 2.
class NumericConvolved final : public Convolved {
 public:
  using Convolved::Convolved;

  double density(std::span<const double> x) const override;
  bool evaluable() const override;
  bool has_cdf() const override;
  double cdf(double x) const override;
  void breakpoints(std::size_t axis, std::vector<double>& out) const override;
};

DensityHandle make_gaussian(std::vector<double> mean, double sigma);
DensityHandle make_gaussian1d(double mean, double sigma);
DensityHandle make_box(std::vector<double> lower, std::vector<double> upper,
                       double min_width);
DensityHandle make_uniform1d(double lower, double upper, double min_width = 0.0);
DensityHandle make_mixture(std::vector<double> weights,
                           std::vector<DensityHandle> components);

// Checked pdf: throws kDimensionMismatch, or kUnsupported for non-evaluable
// composites.
double pdf_eval(const Density& f, std::span<const double> x);

PointSet draw_samples(const Density& f, std::size_t n, SeededRng& rng);

// f * G. Gaussian * Gaussian noise stays an IsoGaussian, mixtures distribute
// over their components, boxes become SmoothedBox, Gaussians under Laplace
// noise become LaplaceSmoothedGaussian; a degenerate noise model
// returns f itself.
DensityHandle convolve_noise(const DensityHandle& f, const NoiseModel& noise);

// {"kind": ..., "params": {...}} serialization.
nlohmann::json density_to_json(const Density& f);
DensityHandle density_from_json(const nlohmann::json& j);

}  // namespace scomp
