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

#include "scomp/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "scomp/distance.hpp"
#include "scomp/error.hpp"
#include "scomp/numeric.hpp"
#include "scomp/parallel.hpp"

namespace scomp {

using std::numbers::pi;

double char_fn(const NoiseModel& noise, std::span<const double> omega) {
  require(omega.size() == noise.dim, ErrorCode::kDimensionMismatch,
          "frequency dimension differs from the noise");
  if (noise.degenerate()) return 1.0;
  const double s = noise.scale;
  if (noise.kind == NoiseKind::kGaussian) {
    double r2 = 0.0;
    for (double w : omega) r2 += w * w;
    return std::exp(-0.5 * s * s * r2);
  }
  double out = 1.0;
  for (double w : omega) out /= 1.0 + s * s * w * w;
  return out;
}

double b_lower(const NoiseModel& noise, double alpha, std::size_t dim) {
  require(alpha >= 0.0, ErrorCode::kInvalidArgument, "alpha must be >= 0");
  require(dim >= 1, ErrorCode::kInvalidArgument, "dimension must be >= 1");
  if (noise.degenerate()) return 1.0;
  const double sa = noise.scale * alpha;
  if (noise.kind == NoiseKind::kGaussian) return std::exp(-0.5 * sa * sa);
  return std::pow(1.0 + sa * sa / double(dim), -double(dim));
}

double zeta(double h) {
  require(h >= 0.0 && !std::isnan(h), ErrorCode::kInvalidArgument,
          "zeta needs h >= 0");
  if (h == 0.0) return 0.0;
  if (h >= 1e4) {
    // int_h^inf sin^2(u)/u^2 du = 1/(2h) + sin(2h)/(4h^2) + O(h^-3).
    const double tail = 0.5 / h + std::sin(2.0 * h) / (4.0 * h * h);
    return 1.0 - 2.0 / pi * tail;
  }
  auto f = [](double u) {
    if (u < 1e-4) return 1.0 - u * u / 3.0;
    const double s = std::sin(u) / u;
    return s * s;
  };
  double sum = 0.0;
  for (double a = 0.0; a < h; a += pi)
    sum += numeric::integrate(f, a, std::min(h, a + pi), {}, 1e-14);
  return std::min(2.0 / pi * sum, std::nextafter(1.0, 0.0));
}

std::string CertificateFamily::name() const {
  switch (kind) {
    case CertFamily::kGaussianIso: return "gaussian_iso";
    case CertFamily::kKMixUniform1D: return "kmix_uniform_1d";
    case CertFamily::kKMixUniformD: return "kmix_uniform_d";
  }
  return "";
}

nlohmann::json CertificateFamily::to_json() const {
  nlohmann::json j{{"family", name()}, {"dim", dim}};
  if (kind == CertFamily::kGaussianIso) {
    j["sigma0"] = sigma0;
  } else {
    j["T"] = T;
    j["k"] = k;
    j["epsilon"] = epsilon;
    if (kind == CertFamily::kKMixUniformD) j["c"] = c;
  }
  return j;
}

CertificateFamily CertificateFamily::from_json(const nlohmann::json& j) {
  try {
    CertificateFamily f;
    const auto name = j.at("family").get<std::string>();
    if (name == "gaussian_iso") {
      f.kind = CertFamily::kGaussianIso;
    } else if (name == "kmix_uniform_1d") {
      f.kind = CertFamily::kKMixUniform1D;
    } else if (name == "kmix_uniform_d") {
      f.kind = CertFamily::kKMixUniformD;
    } else {
      fail(ErrorCode::kConfig, "unknown certificate family: " + name);
    }
    f.dim = j.value("dim", f.dim);
    f.sigma0 = j.value("sigma0", f.sigma0);
    f.T = j.value("T", f.T);
    f.k = j.value("k", f.k);
    f.epsilon = j.value("epsilon", f.epsilon);
    f.c = j.value("c", f.c);
    return f;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed certificate family: ") + e.what());
  }
}

nlohmann::json LowFreqCertificate::to_json() const {
  nlohmann::json j{{"alpha", alpha}, {"xi", xi}, {"family", family},
                   {"verified", verified}};
  j["epsilon"] = epsilon ? nlohmann::json(*epsilon) : nlohmann::json(nullptr);
  j["measured_ratio"] =
      measured_ratio ? nlohmann::json(*measured_ratio) : nlohmann::json(nullptr);
  return j;
}

double gaussian_certificate_threshold(double sigma0, std::size_t dim) {
  return std::sqrt((double(dim) + 4.0) * std::log(2.0)) / sigma0;
}

LowFreqCertificate xi_certificate(const CertificateFamily& fam, double alpha) {
  require(alpha >= 0.0, ErrorCode::kInvalidArgument, "alpha must be >= 0");
  require(fam.dim >= 1, ErrorCode::kInvalidArgument, "dimension must be >= 1");
  LowFreqCertificate cert;
  cert.alpha = alpha;
  cert.family = fam.name();
  const double d = double(fam.dim);
  switch (fam.kind) {
    case CertFamily::kGaussianIso: {
      require(fam.sigma0 > 0.0, ErrorCode::kInvalidArgument, "sigma0 must be > 0");
      require(alpha > gaussian_certificate_threshold(fam.sigma0, fam.dim),
              ErrorCode::kInvalidArgument,
              "alpha below the Gaussian certificate threshold");
      cert.xi = std::pow(2.0, d / 2.0 + 2.0) *
                std::exp(-0.5 * fam.sigma0 * fam.sigma0 * alpha * alpha);
      break;
    }
    case CertFamily::kKMixUniform1D: {
      require(fam.T > 0.0 && fam.k >= 1 && fam.epsilon >= 0.0,
              ErrorCode::kInvalidArgument, "bad uniform-mixture certificate");
      const double h = alpha * fam.T * fam.T * fam.epsilon * fam.epsilon /
                       (2.0 * (4.0 * double(fam.k) - 1.0));
      cert.xi = 1.0 - zeta(h);
      cert.epsilon = fam.epsilon;
      break;
    }
    case CertFamily::kKMixUniformD: {
      require(fam.T > 0.0 && fam.k >= 1 && fam.epsilon >= 0.0 && fam.c > 0.0,
              ErrorCode::kInvalidArgument, "bad uniform-mixture certificate");
      const double h = alpha / (2.0 * fam.c * double(fam.k) * std::sqrt(d)) *
                       std::pow(fam.T * fam.epsilon, 2.0 / d);
      cert.xi = 1.0 - std::pow(zeta(h), d);
      cert.epsilon = fam.epsilon;
      break;
    }
  }
  return cert;
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffers {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
  ~FftwBuffers() {
    std::lock_guard lock(fftw_planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

}  // namespace

LowFreqMeasurement lowfreq_ratio(const Density& p, const Density& q,
                                 double alpha, const LowFreqOptions& options) {
  auto prof = lowfreq_profile(p, q, {alpha}, options);
  LowFreqMeasurement m;
  m.ratio = prof.ratios.front();
  m.spatial_energy = prof.spatial_energy;
  m.spectral_energy = prof.spectral_energy;
  m.top_decade_fraction = prof.top_decade_fraction;
  m.grid_size = prof.grid_size;
  return m;
}

LowFreqProfile lowfreq_profile(const Density& p, const Density& q,
                               const std::vector<double>& alphas,
                               const LowFreqOptions& options) {
  require(p.dim() == q.dim(), ErrorCode::kDimensionMismatch,
          "densities differ in dimension");
  const std::size_t d = p.dim();
  require(d == 1 || d == 2, ErrorCode::kUnsupported,
          "spectral measurement supports d <= 2");
  require(!alphas.empty(), ErrorCode::kInvalidArgument, "no cutoffs given");
  for (double a : alphas)
    require(a >= 0.0, ErrorCode::kInvalidArgument, "alpha must be >= 0");
  require(p.evaluable() && q.evaluable(), ErrorCode::kUnsupported,
          "densities must be evaluable");
  const std::size_t N =
      options.grid_size ? options.grid_size : (d == 1 ? std::size_t{1} << 16 : 1024);
  require(N >= 16, ErrorCode::kInvalidArgument, "grid too small");

  const std::size_t pad = options.padding ? options.padding : (d == 1 ? 16 : 2);
  const std::size_t M = N * pad;  // transform length per axis
  require(M <= (std::size_t{1} << 26) && (d == 1 || M <= 8192),
          ErrorCode::kInvalidArgument, "transform too large");

  const Box box = joint_support(p, q);
  std::vector<double> lo(d), step(d), len(d);
  for (std::size_t a = 0; a < d; ++a) {
    lo[a] = box.lower[a];
    step[a] = (box.upper[a] - box.lower[a]) / double(N);
    len[a] = step[a] * double(M);  // zero-padded period
  }

  FftwBuffers buf;
  const std::size_t total = d == 1 ? M : M * M;
  const std::size_t half = M / 2 + 1;
  const std::size_t out_count = d == 1 ? half : M * half;
  buf.in = fftw_alloc_real(total);
  buf.out = fftw_alloc_complex(out_count);
  require(buf.in && buf.out, ErrorCode::kInfeasible, "FFT buffer allocation failed");
  {
    std::lock_guard lock(fftw_planner_mutex());
    buf.plan = d == 1 ? fftw_plan_dft_r2c_1d(int(M), buf.in, buf.out, FFTW_ESTIMATE)
                      : fftw_plan_dft_r2c_2d(int(M), int(M), buf.in, buf.out,
                                             FFTW_ESTIMATE);
  }
  std::fill(buf.in, buf.in + total, 0.0);

  // Cell-centre samples of p - q in the leading N (x N) block.
  const std::size_t rows = d == 1 ? 1 : N;
  parallel_for(rows, [&](std::size_t r) {
    double x[2];
    if (d == 2) x[0] = lo[0] + (double(r) + 0.5) * step[0];
    for (std::size_t c = 0; c < N; ++c) {
      x[d - 1] = lo[d - 1] + (double(c) + 0.5) * step[d - 1];
      std::span<const double> pt(x, d);
      buf.in[r * (d == 1 ? 0 : M) + c] = p.density(pt) - q.density(pt);
    }
  });
  fftw_execute(buf.plan);

  // Continuous-transform energy (2 pi)^-d int |H|^2 = sum_k |h^d DFT_k|^2 / L^d.
  double cell = 1.0, vol = 1.0, nyq = std::numeric_limits<double>::infinity();
  double dw = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    cell *= step[a];
    vol *= len[a];
    nyq = std::min(nyq, pi / step[a]);
    dw = std::max(dw, 2.0 * pi / len[a]);
  }
  const double scale = cell * cell / vol;
  const double top = 0.1 * nyq;
  const std::size_t na = alphas.size();
  std::vector<double> high(na, 0.0);
  double all = 0.0, topdec = 0.0;
  const std::size_t out_rows = d == 1 ? 1 : M;
  for (std::size_t r = 0; r < out_rows; ++r) {
    const double kr = r <= M / 2 ? double(r) : double(r) - double(M);
    const double w0 = d == 2 ? 2.0 * pi * kr / len[0] : 0.0;
    for (std::size_t c = 0; c < half; ++c) {
      const double w1 = 2.0 * pi * double(c) / len[d - 1];
      const double mult = (c == 0 || (M % 2 == 0 && c == M / 2)) ? 1.0 : 2.0;
      const auto& z = buf.out[r * half + c];
      const double e = mult * scale * (z[0] * z[0] + z[1] * z[1]);
      const double w = std::hypot(w0, w1);
      all += e;
      // Bins straddling the cutoff count by the share of their cell above it.
      for (std::size_t i = 0; i < na; ++i)
        high[i] += alphas[i] > 0.0
                       ? e * std::clamp((w - alphas[i]) / dw + 0.5, 0.0, 1.0)
                       : e;
      if (w >= top) topdec += e;
    }
  }

  LowFreqProfile m;
  m.alphas = alphas;
  m.grid_size = N;
  m.spectral_energy = all;
  const double l2 = distance(p, q, Metric::kL2, DistanceMethod::kQuadrature).value;
  m.spatial_energy = l2 * l2;
  require(m.spatial_energy > 0.0 && all > 0.0, ErrorCode::kInvalidArgument,
          "p and q coincide in L2");
  m.top_decade_fraction = topdec / all;
  require(m.top_decade_fraction < options.nyquist_tolerance,
          ErrorCode::kInvalidArgument,
          "grid does not resolve p - q (top decade carries " +
              std::to_string(m.top_decade_fraction) + " of the energy)");
  require(std::abs(all - m.spatial_energy) <=
              options.parseval_tolerance * m.spatial_energy,
          ErrorCode::kInvalidArgument, "Parseval cross-check failed");
  for (double h : high) m.ratios.push_back(h / all);
  return m;
}

double l2_error_bound(double epsilon, const NoiseModel& noise,
                      const std::vector<LowFreqCertificate>& certs) {
  require(!certs.empty(), ErrorCode::kInvalidArgument,
          "at least one certificate required");
  require(epsilon >= 0.0, ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : certs) {
    require(c.xi < 1.0, ErrorCode::kInvalidArgument, "certificate needs xi < 1");
    const double b = b_lower(noise, c.alpha, noise.dim);
    best = std::min(best, 24.0 / std::sqrt(b * (1.0 - c.xi)));
  }
  return epsilon * best;
}

nlohmann::json Envelope::to_json() const {
  if (kind == EnvelopeKind::kConstantOnBox)
    return {{"kind", "constant_on_box"}, {"c", c}, {"volume", volume}};
  return {{"kind", "gaussian"}, {"C1", C1}, {"gamma", gamma}, {"dim", dim}};
}

Envelope Envelope::from_json(const nlohmann::json& j) {
  try {
    Envelope e;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant_on_box") {
      e.kind = EnvelopeKind::kConstantOnBox;
      e.c = j.at("c").get<double>();
      e.volume = j.at("volume").get<double>();
    } else if (kind == "gaussian") {
      e.kind = EnvelopeKind::kGaussian;
      e.C1 = j.at("C1").get<double>();
      e.gamma = j.at("gamma").get<double>();
      e.dim = j.value("dim", std::size_t{1});
    } else {
      fail(ErrorCode::kConfig, "unknown envelope kind: " + kind);
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kConfig, std::string("malformed envelope: ") + ex.what());
  }
}

double Envelope::sup() const {
  return kind == EnvelopeKind::kConstantOnBox ? c : C1;
}

double Envelope::l1() const {
  if (kind == EnvelopeKind::kConstantOnBox) return c * volume;
  return C1 * std::pow(pi / gamma, double(dim) / 2.0);
}

double Envelope::l2_squared() const {
  if (kind == EnvelopeKind::kConstantOnBox) return c * c * volume;
  return C1 * C1 * std::pow(pi / (2.0 * gamma), double(dim) / 2.0);
}

namespace {

double ball_volume(double radius, std::size_t dim) {
  const double h = double(dim) / 2.0;
  return std::pow(pi, h) * std::pow(radius, double(dim)) / std::tgamma(h + 1.0);
}

}  // namespace

double Envelope::clipped_energy(double level) const {
  if (level <= 0.0) return 0.0;
  if (level >= sup()) return l2_squared();
  if (kind == EnvelopeKind::kConstantOnBox) return level * level * volume;
  const double r2 = std::log(C1 / level) / gamma;
  const double h = double(dim) / 2.0;
  return level * level * ball_volume(std::sqrt(r2), dim) +
         l2_squared() * boost::math::gamma_q(h, 2.0 * gamma * r2);
}

double Envelope::clipped_mass(double level) const {
  if (level <= 0.0) return 0.0;
  if (level >= sup()) return l1();
  if (kind == EnvelopeKind::kConstantOnBox) return level * volume;
  const double r2 = std::log(C1 / level) / gamma;
  const double h = double(dim) / 2.0;
  return level * ball_volume(std::sqrt(r2), dim) +
         l1() * boost::math::gamma_q(h, gamma * r2);
}

nlohmann::json WaterFillResult::to_json() const {
  return {{"level", level}, {"l1_bound", l1_bound}, {"region", region},
          {"region_radius", region_radius}};
}

WaterFillResult waterfill(const Envelope& env, double epsilon_l2) {
  require(epsilon_l2 > 0.0, ErrorCode::kInvalidArgument, "epsilon must be > 0");
  if (env.kind == EnvelopeKind::kConstantOnBox)
    require(env.c > 0.0 && env.volume > 0.0, ErrorCode::kInvalidArgument,
            "constant envelope needs c, V > 0");
  else
    require(env.C1 > 0.0 && env.gamma > 0.0 && env.dim >= 1,
            ErrorCode::kInvalidArgument, "Gaussian envelope needs C1, gamma > 0");
  const double target = epsilon_l2 * epsilon_l2;
  const double full = env.l2_squared();
  require(target <= full * (1.0 + 1e-12), ErrorCode::kInfeasible,
          "epsilon exceeds the envelope's L2 norm");

  WaterFillResult r;
  if (target >= full * (1.0 - 1e-12)) {
    r.level = env.sup();
  } else {
    auto f = [&](double level) { return env.clipped_energy(level) - target; };
    std::uintmax_t iters = 400;
    auto [a, b] = boost::math::tools::bisect(
        f, 0.0, env.sup(), boost::math::tools::eps_tolerance<double>(40), iters);
    r.level = 0.5 * (a + b);
  }
  r.l1_bound = env.clipped_mass(r.level);
  if (env.kind == EnvelopeKind::kConstantOnBox) {
    r.region = "box";
  } else {
    r.region = "ball";
    r.region_radius = std::sqrt(std::max(0.0, std::log(env.C1 / r.level) / env.gamma));
  }
  return r;
}

double tv_from_l2(const TVBound& bound, double epsilon_l2) {
  require(epsilon_l2 > 0.0, ErrorCode::kInvalidArgument, "epsilon must be > 0");
  const double h = double(bound.dim) / 2.0;
  if (bound.kind == TVBoundKind::kBoundedSupport) {
    require(bound.R > 0.0, ErrorCode::kInvalidArgument, "R must be > 0");
    return std::pow(2.0 * bound.R, h) * epsilon_l2;
  }
  require(bound.C2.has_value(), ErrorCode::kInvalidArgument,
          "sub-Gaussian bound needs C2");
  require(epsilon_l2 < 1.0, ErrorCode::kInvalidArgument,
          "sub-Gaussian bound needs epsilon < 1");
  return *bound.C2 * epsilon_l2 * std::pow(std::log(1.0 / epsilon_l2), h);
}

LogFactorFit fit_log_factor(const Envelope& env, const std::vector<double>& eps) {
  require(eps.size() >= 2, ErrorCode::kInvalidArgument, "need two epsilons");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : eps) {
    require(e > 0.0 && e < 1.0, ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
    const double x = std::log(std::log(1.0 / e));
    const double y = std::log(waterfill(env, e).l1_bound / e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(eps.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {std::exp((sy - slope * sx) / n), slope};
}

double fit_subgaussian_c2(const Envelope& env, const std::vector<double>& eps) {
  require(!eps.empty(), ErrorCode::kInvalidArgument, "need epsilons");
  double c2 = 0.0;
  for (double e : eps) {
    require(e > 0.0 && e < 1.0, ErrorCode::kInvalidArgument,
            "epsilon must lie in (0, 1)");
    const double denom = e * std::pow(std::log(1.0 / e), double(env.dim) / 2.0);
    c2 = std::max(c2, waterfill(env, e).l1_bound / denom);
  }
  return c2;
}

}  // namespace scomp
