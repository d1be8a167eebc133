#pragma once

#include <cstdint>
#include <vector>

#include "mekt/alignment.hpp"

namespace mekt {

/// Synthetic shifted-domain generator. Every domain draws the same
/// random stream, so domains differ only through the deterministic
/// rotations; identical seeds give bitwise-identical output.
struct SynthConfig {
  std::uint64_t seed = 42;
  int channels = 8;
  int samples = 128;
  int trials_per_class = 60;
  int classes = 2;
  double class_rotation_deg = 20.0;   // class-conditional spatial rotation
  double domain_rotation_deg = 30.0;  // inter-domain shift per domain index
  double noise_scale = 2.0;
  int n_domains = 2;
};

std::vector<DomainTrials> synth_domains(const SynthConfig& cfg);

}  // namespace mekt
