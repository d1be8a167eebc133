#include "mekt/container.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace mekt {

namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 21;  // magic + 4 u32 fields + label flag

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;  // host is little-endian
}

template <typename T>
void append_le(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

DomainTrials read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("read_container: cannot open " + path.string());
  }
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());

  if (buf.size() < kHeaderBytes) {
    throw FormatError("read_container: truncated header at offset " +
                      std::to_string(buf.size()));
  }
  if (std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw FormatError("read_container: bad magic");
  }
  const auto version = read_le<std::uint32_t>(buf, 4);
  if (version > kVersion) {
    throw UnsupportedVersion("read_container: unsupported version " +
                             std::to_string(version));
  }
  const auto n_trials = read_le<std::uint32_t>(buf, 8);
  const auto channels = read_le<std::uint32_t>(buf, 12);
  const auto samples = read_le<std::uint32_t>(buf, 16);
  const auto label_flag = static_cast<unsigned char>(buf[20]);
  if (label_flag > 1) {
    throw FormatError("read_container: invalid label flag");
  }

  const std::size_t expected = kHeaderBytes +
                               std::size_t{4} * n_trials * label_flag +
                               std::size_t{8} * n_trials * channels * samples;
  if (buf.size() != expected) {
    throw FormatError("read_container: truncated at offset " +
                      std::to_string(buf.size()) + ", expected " +
                      std::to_string(expected) + " bytes");
  }

  DomainTrials domain;
  domain.subject_id = path.stem().string();
  std::size_t offset = kHeaderBytes;
  if (label_flag) {
    std::vector<int> labels(n_trials);
    for (std::uint32_t i = 0; i < n_trials; ++i) {
      labels[i] = read_le<std::int32_t>(buf, offset);
      offset += 4;
      if (labels[i] < 1) {
        throw FormatError("read_container: label below 1");
      }
    }
    domain.labels = std::move(labels);
  }
  domain.trials.reserve(n_trials);
  for (std::uint32_t i = 0; i < n_trials; ++i) {
    Matrix x(channels, samples);
    for (std::uint32_t r = 0; r < channels; ++r) {
      for (std::uint32_t s = 0; s < samples; ++s) {
        x(r, s) = read_le<double>(buf, offset);
        offset += 8;
      }
    }
    domain.trials.push_back(std::move(x));
  }
  return domain;
}

void write_container(const DomainTrials& domain,
                     const std::filesystem::path& path) {
  const auto n_trials = static_cast<std::uint32_t>(domain.trials.size());
  std::uint32_t channels = 0, samples = 0;
  if (n_trials > 0) {
    channels = static_cast<std::uint32_t>(domain.trials[0].rows());
    samples = static_cast<std::uint32_t>(domain.trials[0].cols());
  }
  const unsigned char label_flag = domain.labels ? 1 : 0;
  if (label_flag && domain.labels->size() != domain.trials.size()) {
    throw DimensionError("write_container: label count mismatch");
  }

  std::string out;
  out.append(kMagic, 4);
  append_le(out, kVersion);
  append_le(out, n_trials);
  append_le(out, channels);
  append_le(out, samples);
  out.push_back(static_cast<char>(label_flag));
  if (label_flag) {
    for (int label : *domain.labels) {
      append_le(out, static_cast<std::int32_t>(label));
    }
  }
  for (const auto& x : domain.trials) {
    if (x.rows() != channels || x.cols() != samples) {
      throw DimensionError("write_container: inconsistent trial shapes");
    }
    for (std::uint32_t r = 0; r < channels; ++r) {
      for (std::uint32_t s = 0; s < samples; ++s) {
        append_le(out, x(r, s));
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file || !file.write(out.data(), static_cast<std::streamsize>(out.size()))) {
    throw FormatError("write_container: cannot write " + path.string());
  }
}

Matrix read_csv_trial(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("read_csv_trial: cannot open " + path.string());
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw FormatError("read_csv_trial: missing header");
  }
  int channels = 0, samples = 0;
  if (std::sscanf(header.c_str(), "%d,%d", &channels, &samples) != 2 ||
      channels < 1 || samples < 1) {
    throw FormatError("read_csv_trial: bad header, expected channels,samples");
  }
  Matrix x(channels, samples);
  std::string line;
  for (int r = 0; r < channels; ++r) {
    if (!std::getline(in, line)) {
      throw FormatError("read_csv_trial: missing row " + std::to_string(r));
    }
    std::stringstream ss(line);
    std::string cell;
    for (int s = 0; s < samples; ++s) {
      if (!std::getline(ss, cell, ',')) {
        throw FormatError("read_csv_trial: short row " + std::to_string(r));
      }
      try {
        x(r, s) = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("read_csv_trial: bad value in row " + std::to_string(r));
      }
    }
  }
  return x;
}

}  // namespace mekt
