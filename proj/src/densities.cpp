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

#include "scomp/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "scomp/error.hpp"
#include "scomp/numeric.hpp"

namespace scomp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Gaussian tail beyond 8 sigma is ~1e-15.
constexpr double kGaussianSpan = 8.0;
// Laplace tail beyond 28 b is ~1e-12.
constexpr double kLaplaceSpan = 28.0;
constexpr double kWidthSlack = 1e-12;

std::vector<double> json_vector(const nlohmann::json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_array(), ErrorCode::kConfig,
          std::string("missing array field '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

// Mills ratio (1 - Phi(z)) / phi(z), finite for all z.
double mills_ratio(double z) {
  constexpr double kRootHalfPi = 1.2533141373155002512;
  if (z < 0.0) return numeric::normal_cdf(-z) / numeric::normal_pdf(z);
  double u = z * numeric::kInvSqrt2;
  if (u < 25.0) return kRootHalfPi * std::erfc(u) * std::exp(u * u);
  // Asymptotic series of erfcx.
  double w = 1.0 / (2.0 * u * u);
  double erfcx = (1.0 - w + 3.0 * w * w - 15.0 * w * w * w) /
                 (u * std::sqrt(std::numbers::pi));
  return kRootHalfPi * erfcx;
}

// phi(y) * R(z) with z = k - y, k = sigma/b >= 0, without overflow.
double phi_times_mills(double y, double k) {
  double z = k - y;
  if (z < 0.0) return numeric::normal_cdf(-z) * std::exp(0.5 * k * k - k * y);
  return numeric::normal_pdf(y) * mills_ratio(z);
}

}  // namespace

double Density::cdf(double) const {
  fail(ErrorCode::kUnsupported, "density has no closed-form CDF");
}

void Density::breakpoints(std::size_t, std::vector<double>&) const {}

// ---------------------------------------------------------------------------
// IsoGaussian

IsoGaussian::IsoGaussian(std::vector<double> mean, double sigma)
    : mean_(std::move(mean)), sigma_(sigma) {
  require(!mean_.empty(), ErrorCode::kInvalidArgument,
          "Gaussian mean must have dimension >= 1");
  require(sigma_ > 0.0 && std::isfinite(sigma_), ErrorCode::kInvalidArgument,
          "Gaussian sigma must be positive");
  log_norm_ = -static_cast<double>(mean_.size()) *
              (std::log(sigma_) + 0.5 * std::log(2.0 * std::numbers::pi));
}

double IsoGaussian::density(std::span<const double> x) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    double z = x[i] - mean_[i];
    sq += z * z;
  }
  return std::exp(log_norm_ - 0.5 * sq / (sigma_ * sigma_));
}

void IsoGaussian::draw(SeededRng& rng, std::span<double> out) const {
  for (std::size_t i = 0; i < mean_.size(); ++i)
    out[i] = mean_[i] + sigma_ * rng.normal();
}

double IsoGaussian::cdf(double x) const {
  return numeric::normal_cdf((x - mean_[0]) / sigma_);
}

Box IsoGaussian::effective_support() const {
  Box b{mean_, mean_};
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    b.lower[i] -= kGaussianSpan * sigma_;
    b.upper[i] += kGaussianSpan * sigma_;
  }
  return b;
}

nlohmann::json IsoGaussian::to_json() const {
  return {{"kind", "iso_gaussian"},
          {"params", {{"mean", mean_}, {"sigma", sigma_}}}};
}

// ---------------------------------------------------------------------------
// UniformBox

UniformBox::UniformBox(std::vector<double> lower, std::vector<double> upper,
                       double min_width)
    : lower_(std::move(lower)), upper_(std::move(upper)), min_width_(min_width) {
  require(!lower_.empty() && lower_.size() == upper_.size(),
          ErrorCode::kDimensionMismatch, "box bounds must have equal dimension");
  require(min_width_ > 0.0, ErrorCode::kInvalidArgument,
          "box minimum width T must be positive");
  volume_ = 1.0;
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    double w = upper_[i] - lower_[i];
    require(std::isfinite(w) && w >= min_width_ * (1.0 - kWidthSlack),
            ErrorCode::kInvalidArgument,
            "box width below the minimum width T in coordinate " +
                std::to_string(i));
    volume_ *= w;
  }
}

double UniformBox::density(std::span<const double> x) const {
  for (std::size_t i = 0; i < lower_.size(); ++i)
    if (x[i] < lower_[i] || x[i] > upper_[i]) return 0.0;
  return 1.0 / volume_;
}

void UniformBox::draw(SeededRng& rng, std::span<double> out) const {
  for (std::size_t i = 0; i < lower_.size(); ++i)
    out[i] = rng.uniform(lower_[i], upper_[i]);
}

double UniformBox::cdf(double x) const {
  if (x <= lower_[0]) return 0.0;
  if (x >= upper_[0]) return 1.0;
  return (x - lower_[0]) / (upper_[0] - lower_[0]);
}

void UniformBox::breakpoints(std::size_t axis, std::vector<double>& out) const {
  out.push_back(lower_[axis]);
  out.push_back(upper_[axis]);
}

double UniformBox::smoothness_scale() const { return kInf; }

nlohmann::json UniformBox::to_json() const {
  return {{"kind", "uniform_box"},
          {"params",
           {{"lower", lower_}, {"upper", upper_}, {"min_width", min_width_}}}};
}

// ---------------------------------------------------------------------------
// Mixture

Mixture::Mixture(std::vector<double> weights,
                 std::vector<DensityHandle> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  require(!components_.empty(), ErrorCode::kInvalidArgument,
          "mixture needs at least one component");
  require(weights_.size() == components_.size(), ErrorCode::kInvalidArgument,
          "mixture weight count differs from component count");
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    require(components_[i] != nullptr, ErrorCode::kInvalidArgument,
            "null mixture component");
    require(weights_[i] >= 0.0, ErrorCode::kInvalidArgument,
            "mixture weights must be nonnegative");
    require(components_[i]->dim() == components_[0]->dim(),
            ErrorCode::kDimensionMismatch,
            "mixture components differ in dimension");
    total += weights_[i];
    cumulative_.push_back(total);
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::kInvalidArgument,
          "mixture weights do not sum to 1");
}

double Mixture::density(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) acc += weights_[i] * components_[i]->density(x);
  return acc;
}

void Mixture::draw(SeededRng& rng, std::span<double> out) const {
  double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t idx = std::min<std::size_t>(it - cumulative_.begin(),
                                          components_.size() - 1);
  components_[idx]->draw(rng, out);
}

bool Mixture::evaluable() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const auto& c) { return c->evaluable(); });
}

bool Mixture::has_cdf() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const auto& c) { return c->has_cdf(); });
}

double Mixture::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) acc += weights_[i] * components_[i]->cdf(x);
  return acc;
}

Box Mixture::effective_support() const {
  Box out;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (weights_[i] == 0.0 && components_.size() > 1) continue;
    Box b = components_[i]->effective_support();
    if (out.lower.empty()) {
      out = b;
      continue;
    }
    for (std::size_t d = 0; d < b.lower.size(); ++d) {
      out.lower[d] = std::min(out.lower[d], b.lower[d]);
      out.upper[d] = std::max(out.upper[d], b.upper[d]);
    }
  }
  return out;
}

void Mixture::breakpoints(std::size_t axis, std::vector<double>& out) const {
  for (const auto& c : components_) c->breakpoints(axis, out);
}

double Mixture::smoothness_scale() const {
  double s = kInf;
  for (const auto& c : components_) s = std::min(s, c->smoothness_scale());
  return s;
}

nlohmann::json Mixture::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components_) comps.push_back(c->to_json());
  return {{"kind", "mixture"},
          {"params", {{"weights", weights_}, {"components", comps}}}};
}

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel NoiseModel::gaussian(double sigma, std::size_t dim) {
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "noise sigma must be nonnegative");
  return {NoiseKind::kGaussian, sigma, dim};
}

NoiseModel NoiseModel::laplace(double b, std::size_t dim) {
  require(b >= 0.0 && std::isfinite(b), ErrorCode::kInvalidArgument,
          "Laplace scale must be nonnegative");
  return {NoiseKind::kLaplace, b, dim};
}

double NoiseModel::pdf1(double z) const {
  if (kind == NoiseKind::kGaussian)
    return numeric::normal_pdf(z / scale) / scale;
  return 0.5 / scale * std::exp(-std::abs(z) / scale);
}

double NoiseModel::cdf1(double z) const {
  if (degenerate()) return z >= 0.0 ? 1.0 : 0.0;
  if (kind == NoiseKind::kGaussian) return numeric::normal_cdf(z / scale);
  return z < 0.0 ? 0.5 * std::exp(z / scale) : 1.0 - 0.5 * std::exp(-z / scale);
}

double NoiseModel::cdf_integral1(double z) const {
  if (degenerate()) return std::max(z, 0.0);
  if (kind == NoiseKind::kGaussian)
    return scale * numeric::normal_cdf_integral(z / scale);
  return z < 0.0 ? 0.5 * scale * std::exp(z / scale)
                 : z + 0.5 * scale * std::exp(-z / scale);
}

double NoiseModel::draw1(SeededRng& rng) const {
  if (kind == NoiseKind::kGaussian) return scale * rng.normal();
  return scale * rng.laplace();
}

double NoiseModel::span() const {
  return scale * (kind == NoiseKind::kGaussian ? kGaussianSpan : kLaplaceSpan);
}

nlohmann::json NoiseModel::to_json() const {
  return {{"kind", kind == NoiseKind::kGaussian ? "gaussian" : "laplace"},
          {"scale", scale},
          {"dim", dim}};
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind"), ErrorCode::kConfig,
          "noise model must be an object with a 'kind'");
  auto kind = j.at("kind").get<std::string>();
  double scale = j.contains("scale") ? j.at("scale").get<double>()
                 : j.contains("sigma") ? j.at("sigma").get<double>()
                                       : j.value("b", 1.0);
  std::size_t dim = j.value("dim", std::size_t{1});
  if (kind == "gaussian") return gaussian(scale, dim);
  if (kind == "laplace") return laplace(scale, dim);
  fail(ErrorCode::kConfig, "unknown noise kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Convolved composites

Convolved::Convolved(DensityHandle base, NoiseModel noise)
    : base_(std::move(base)), noise_(noise) {
  require(base_ != nullptr, ErrorCode::kInvalidArgument, "null base density");
  require(base_->dim() == noise_.dim, ErrorCode::kDimensionMismatch,
          "noise dimension differs from density dimension");
}

void Convolved::draw(SeededRng& rng, std::span<double> out) const {
  base_->draw(rng, out);
  for (double& v : out) v += noise_.draw1(rng);
}

Box Convolved::effective_support() const {
  Box b = base_->effective_support();
  double pad = noise_.span();
  for (std::size_t i = 0; i < b.lower.size(); ++i) {
    b.lower[i] -= pad;
    b.upper[i] += pad;
  }
  return b;
}

double Convolved::smoothness_scale() const {
  return std::min(base_->smoothness_scale(),
                  noise_.degenerate() ? kInf : noise_.scale);
}

nlohmann::json Convolved::to_json() const {
  return {{"kind", "convolved"},
          {"params", {{"base", base_->to_json()}, {"noise", noise_.to_json()}}}};
}

SmoothedBox::SmoothedBox(std::shared_ptr<const UniformBox> box, NoiseModel noise)
    : Convolved(box, noise), box_(std::move(box)) {}

double SmoothedBox::density(std::span<const double> x) const {
  double acc = 1.0;
  const auto& lo = box_->lower();
  const auto& hi = box_->upper();
  for (std::size_t i = 0; i < lo.size(); ++i) {
    double u = x[i] - lo[i];
    double v = x[i] - hi[i];
    // F(u) - F(v); use the upper tail when both are right of the origin.
    double diff = v > 0.0 ? noise_.cdf1(-v) - noise_.cdf1(-u)
                          : noise_.cdf1(u) - noise_.cdf1(v);
    acc *= std::max(diff, 0.0) / (hi[i] - lo[i]);
    if (acc == 0.0) break;
  }
  return acc;
}

double SmoothedBox::cdf(double x) const {
  double a = box_->lower()[0];
  double b = box_->upper()[0];
  double c = (noise_.cdf_integral1(x - a) - noise_.cdf_integral1(x - b)) / (b - a);
  return std::clamp(c, 0.0, 1.0);
}

LaplaceSmoothedGaussian::LaplaceSmoothedGaussian(
    std::shared_ptr<const IsoGaussian> gauss, NoiseModel noise)
    : Convolved(gauss, noise), gauss_(std::move(gauss)) {
  require(noise.kind == NoiseKind::kLaplace && !noise.degenerate(),
          ErrorCode::kInvalidArgument, "expected nondegenerate Laplace noise");
}

double LaplaceSmoothedGaussian::density(std::span<const double> x) const {
  const double s = gauss_->sigma();
  const double b = noise_.scale;
  const double k = s / b;
  double acc = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double y = (x[i] - gauss_->mean()[i]) / s;
    acc *= (phi_times_mills(y, k) + phi_times_mills(-y, k)) / (2.0 * b);
  }
  return acc;
}

double LaplaceSmoothedGaussian::cdf(double x) const {
  const double s = gauss_->sigma();
  const double k = s / noise_.scale;
  double y = (x - gauss_->mean()[0]) / s;
  double c = numeric::normal_cdf(y) -
             0.5 * (phi_times_mills(y, k) - phi_times_mills(-y, k));
  return std::clamp(c, 0.0, 1.0);
}

double NumericConvolved::density(std::span<const double> x) const {
  require(evaluable(), ErrorCode::kUnsupported,
          "pdf of this composite is only available for d <= 2");
  const double s = noise_.span();
  const double kink[] = {0.0};
  std::span<const double> breaks =
      noise_.kind == NoiseKind::kLaplace ? std::span<const double>(kink)
                                         : std::span<const double>();
  if (dim() == 1) {
    double xv = x[0];
    return numeric::integrate(
        [&](double z) {
          double p = xv - z;
          return base_->density(std::span<const double>(&p, 1)) * noise_.pdf1(z);
        },
        -s, s, breaks, 1e-10);
  }
  return numeric::integrate2d(
      [&](double z0, double z1) {
        double p[2] = {x[0] - z0, x[1] - z1};
        return base_->density(p) * noise_.pdf1(z0) * noise_.pdf1(z1);
      },
      -s, s, -s, s, breaks, breaks, 1e-8);
}

bool NumericConvolved::evaluable() const {
  return dim() <= 2 && base_->evaluable();
}

bool NumericConvolved::has_cdf() const { return dim() == 1 && base_->has_cdf(); }

double NumericConvolved::cdf(double x) const {
  require(has_cdf(), ErrorCode::kUnsupported, "composite has no CDF");
  const double s = noise_.span();
  const double kink[] = {0.0};
  std::span<const double> breaks =
      noise_.kind == NoiseKind::kLaplace ? std::span<const double>(kink)
                                         : std::span<const double>();
  return std::clamp(
      numeric::integrate(
          [&](double z) { return base_->cdf(x - z) * noise_.pdf1(z); }, -s, s,
          breaks, 1e-10),
      0.0, 1.0);
}

void NumericConvolved::breakpoints(std::size_t, std::vector<double>&) const {}

// ---------------------------------------------------------------------------
// Free functions

DensityHandle make_gaussian(std::vector<double> mean, double sigma) {
  return std::make_shared<IsoGaussian>(std::move(mean), sigma);
}

DensityHandle make_gaussian1d(double mean, double sigma) {
  return make_gaussian({mean}, sigma);
}

DensityHandle make_box(std::vector<double> lower, std::vector<double> upper,
                       double min_width) {
  return std::make_shared<UniformBox>(std::move(lower), std::move(upper),
                                      min_width);
}

DensityHandle make_uniform1d(double lower, double upper, double min_width) {
  if (min_width <= 0.0) min_width = upper - lower;
  return make_box({lower}, {upper}, min_width);
}

DensityHandle make_mixture(std::vector<double> weights,
                           std::vector<DensityHandle> components) {
  return std::make_shared<Mixture>(std::move(weights), std::move(components));
}

double pdf_eval(const Density& f, std::span<const double> x) {
  require(x.size() == f.dim(), ErrorCode::kDimensionMismatch,
          "point dimension " + std::to_string(x.size()) +
              " differs from density dimension " + std::to_string(f.dim()));
  require(f.evaluable(), ErrorCode::kUnsupported,
          "density has no supported pdf evaluation route");
  return f.density(x);
}

PointSet draw_samples(const Density& f, std::size_t n, SeededRng& rng) {
  require(n >= 1, ErrorCode::kInvalidArgument, "sample count must be >= 1");
  PointSet out(f.dim(), n);
  for (std::size_t i = 0; i < n; ++i) f.draw(rng, out[i]);
  return out;
}

DensityHandle convolve_noise(const DensityHandle& f, const NoiseModel& noise) {
  require(f != nullptr, ErrorCode::kInvalidArgument, "null density");
  require(f->dim() == noise.dim, ErrorCode::kDimensionMismatch,
          "noise dimension differs from density dimension");
  if (noise.degenerate()) return f;
  switch (f->kind()) {
    case DensityKind::kIsoGaussian:
      if (noise.kind == NoiseKind::kGaussian) {
        const auto& g = static_cast<const IsoGaussian&>(*f);
        return make_gaussian(g.mean(), std::hypot(g.sigma(), noise.scale));
      }
      return std::make_shared<LaplaceSmoothedGaussian>(
          std::static_pointer_cast<const IsoGaussian>(f), noise);
    case DensityKind::kUniformBox:
      return std::make_shared<SmoothedBox>(
          std::static_pointer_cast<const UniformBox>(f), noise);
    case DensityKind::kMixture: {
      const auto& m = static_cast<const Mixture&>(*f);
      std::vector<DensityHandle> comps;
      comps.reserve(m.components().size());
      for (const auto& c : m.components()) comps.push_back(convolve_noise(c, noise));
      return make_mixture(m.weights(), std::move(comps));
    }
    case DensityKind::kConvolved: {
      const auto& c = static_cast<const Convolved&>(*f);
      if (c.noise().kind == NoiseKind::kGaussian &&
          noise.kind == NoiseKind::kGaussian)
        return convolve_noise(
            c.base(), NoiseModel::gaussian(std::hypot(c.noise().scale, noise.scale),
                                           noise.dim));
      break;
    }
  }
  return std::make_shared<NumericConvolved>(f, noise);
}

nlohmann::json density_to_json(const Density& f) { return f.to_json(); }

DensityHandle density_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind") && j.contains("params"),
          ErrorCode::kConfig, "density JSON needs 'kind' and 'params'");
  const auto kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  if (kind == "iso_gaussian")
    return make_gaussian(json_vector(p, "mean"), p.at("sigma").get<double>());
  if (kind == "uniform_box")
    return make_box(json_vector(p, "lower"), json_vector(p, "upper"),
                    p.at("min_width").get<double>());
  if (kind == "mixture") {
    std::vector<DensityHandle> comps;
    for (const auto& c : p.at("components")) comps.push_back(density_from_json(c));
    return make_mixture(json_vector(p, "weights"), std::move(comps));
  }
  if (kind == "convolved")
    return convolve_noise(density_from_json(p.at("base")),
                          NoiseModel::from_json(p.at("noise")));
  fail(ErrorCode::kConfig, "unknown density kind '" + kind + "'");
}

}  // namespace scomp
