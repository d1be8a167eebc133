#include "mekt/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mekt {

namespace {

/// Rotation by `deg` degrees applied on channel planes (0,1), (2,3), ...
Matrix plane_rotation(int channels, double deg) {
  const double rad = deg * std::numbers::pi / 180.0;
  Matrix r = Matrix::Identity(channels, channels);
  for (int base = 0; base + 1 < channels; base += 2) {
    Matrix g = Matrix::Identity(channels, channels);
    g(base, base) = std::cos(rad);
    g(base + 1, base + 1) = std::cos(rad);
    g(base, base + 1) = -std::sin(rad);
    g(base + 1, base) = std::sin(rad);
    r = g * r;
  }
  return r;
}

void validate(const SynthConfig& cfg) {
  if (cfg.classes < 2) throw ConfigError("synth_domains: need at least 2 classes");
  if (cfg.channels < 2) throw ConfigError("synth_domains: need at least 2 channels");
  if (cfg.samples < 1 || cfg.trials_per_class < 1 || cfg.n_domains < 1) {
    throw ConfigError("synth_domains: counts must be positive");
  }
  if (cfg.noise_scale < 0.0) throw ConfigError("synth_domains: negative noise scale");
  if (!std::isfinite(cfg.class_rotation_deg) ||
      !std::isfinite(cfg.domain_rotation_deg)) {
    throw ConfigError("synth_domains: non-finite rotation angle");
  }
}

}  // namespace

std::vector<DomainTrials> synth_domains(const SynthConfig& cfg) {
  validate(cfg);
  const int c = cfg.channels;
  const int t = cfg.samples;

  std::vector<DomainTrials> domains;
  domains.reserve(cfg.n_domains);
  for (int d = 0; d < cfg.n_domains; ++d) {
    // Every domain replays the same stream; shift comes from rotation only.
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix domain_rot = plane_rotation(c, d * cfg.domain_rotation_deg);
    DomainTrials domain;
    domain.subject_id = "synth" + std::to_string(d);
    std::vector<int> labels;

    for (int k = 1; k <= cfg.classes; ++k) {
      Vector variances = Vector::Ones(c);
      variances[(k - 1) % c] = 5.0;
      variances[k % c] = 0.3;
      Matrix mixing = domain_rot * plane_rotation(c, (k - 1) * cfg.class_rotation_deg) *
                      variances.cwiseSqrt().asDiagonal();
      for (int trial = 0; trial < cfg.trials_per_class; ++trial) {
        Matrix latent(c, t);
        for (int i = 0; i < c; ++i) {
          for (int j = 0; j < t; ++j) latent(i, j) = gauss(rng);
        }
        Matrix noise(c, t);
        for (int i = 0; i < c; ++i) {
          for (int j = 0; j < t; ++j) noise(i, j) = gauss(rng);
        }
        domain.trials.push_back(mixing * latent + cfg.noise_scale * noise);
        labels.push_back(k);
      }
    }
    domain.labels = std::move(labels);
    domains.push_back(std::move(domain));
  }
  return domains;
}

}  // namespace mekt
