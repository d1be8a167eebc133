#pragma once

#include <filesystem>
#include <string>

#include "mekt/alignment.hpp"

namespace mekt {

/// EEGB binary container, version 1, little-endian throughout:
///   magic "EEGB" | u32 version | u32 n_trials | u32 channels | u32 samples
///   | u8 label_flag | [i32 labels] | f64 payload, trial-major, row-major.
DomainTrials read_container(const std::filesystem::path& path);
void write_container(const DomainTrials& domain,
                     const std::filesystem::path& path);

/// CSV import shim: header row "channels,samples", then c rows of t
/// comma-separated values — one trial per file.
Matrix read_csv_trial(const std::filesystem::path& path);

}  // namespace mekt
