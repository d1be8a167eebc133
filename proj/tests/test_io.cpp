#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mekt/container.hpp"
#include "mekt/synth.hpp"
#include "test_util.hpp"

using namespace mekt;
using mekt::test::random_matrix;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const char* name) {
    path = fs::temp_directory_path() / name;
  }
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

DomainTrials sample_domain(bool with_labels) {
  std::mt19937_64 rng(269);
  DomainTrials d;
  for (int i = 0; i < 5; ++i) d.trials.push_back(random_matrix(3, 16, rng));
  if (with_labels) d.labels = std::vector<int>{1, 2, 1, 2, 1};
  d.subject_id = "round";
  return d;
}

}  // namespace

TEST_CASE("container round trip is bitwise exact") {
  for (bool labels : {true, false}) {
    TempFile tmp(labels ? "mekt_rt_lab.eegb" : "mekt_rt_unlab.eegb");
    DomainTrials d = sample_domain(labels);
    write_container(d, tmp.path);
    DomainTrials back = read_container(tmp.path);
    REQUIRE(back.trials.size() == d.trials.size());
    for (size_t i = 0; i < d.trials.size(); ++i) {
      CHECK(back.trials[i].rows() == 3);
      CHECK(back.trials[i].cols() == 16);
      CHECK((back.trials[i] - d.trials[i]).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(back.labels.has_value() == labels);
    if (labels) CHECK(*back.labels == *d.labels);
  }
}

TEST_CASE("container header layout is exactly as documented") {
  TempFile tmp("mekt_hdr.eegb");
  DomainTrials d = sample_domain(true);
  write_container(d, tmp.path);

  std::ifstream in(tmp.path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "EEGB");
  auto read_u32 = [&in]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  };
  CHECK(read_u32() == 1);   // version
  CHECK(read_u32() == 5);   // trials
  CHECK(read_u32() == 3);   // channels
  CHECK(read_u32() == 16);  // samples
  char flag;
  in.get(flag);
  CHECK(flag == 1);
  // total size: 21-byte header + 5 labels + payload doubles
  const auto expect = 21 + 5 * 4 + 5 * 3 * 16 * 8;
  CHECK(fs::file_size(tmp.path) == static_cast<uintmax_t>(expect));
}

TEST_CASE("payload is trial-major row-major doubles") {
  TempFile tmp("mekt_payload.eegb");
  DomainTrials d;
  Matrix x(2, 3);
  x << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  d.trials.push_back(x);
  write_container(d, tmp.path);
  std::ifstream in(tmp.path, std::ios::binary);
  in.seekg(21);
  double vals[6];
  in.read(reinterpret_cast<char*>(vals), sizeof(vals));
  for (int i = 0; i < 6; ++i) {
    CHECK(vals[i] == doctest::Approx(static_cast<double>(i + 1)));
  }
}

TEST_CASE("container rejects malformed files") {
  TempFile tmp("mekt_bad.eegb");
  DomainTrials d = sample_domain(true);
  write_container(d, tmp.path);

  SUBCASE("bad magic") {
    std::fstream f(tmp.path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
    f.close();
    CHECK_THROWS_AS(read_container(tmp.path), FormatError);
  }
  SUBCASE("future version") {
    std::fstream f(tmp.path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v2[4] = {2, 0, 0, 0};
    f.write(v2, 4);
    f.close();
    CHECK_THROWS_AS(read_container(tmp.path), UnsupportedVersion);
  }
  SUBCASE("truncated payload") {
    const auto full = fs::file_size(tmp.path);
    fs::resize_file(tmp.path, full - 7);
    CHECK_THROWS_AS(read_container(tmp.path), FormatError);
  }
  SUBCASE("trailing bytes") {
    std::ofstream f(tmp.path, std::ios::app | std::ios::binary);
    f.write("zz", 2);
    f.close();
    CHECK_THROWS_AS(read_container(tmp.path), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_container(tmp.path.string() + ".nope"), FormatError);
  }
}

TEST_CASE("csv trial import") {
  TempFile tmp("mekt_trial.csv");
  {
    std::ofstream out(tmp.path);
    out << "2,3\n";
    out << "1.5,2.5,3.5\n";
    out << "-1.0,0.0,1.0\n";
  }
  Matrix x = read_csv_trial(tmp.path);
  REQUIRE(x.rows() == 2);
  REQUIRE(x.cols() == 3);
  CHECK(x(0, 1) == doctest::Approx(2.5));
  CHECK(x(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("synthetic generator is deterministic per seed") {
  SynthConfig cfg;
  cfg.channels = 4;
  cfg.samples = 32;
  cfg.trials_per_class = 5;
  cfg.n_domains = 2;
  auto a = synth_domains(cfg);
  auto b = synth_domains(cfg);
  REQUIRE(a.size() == 2);
  REQUIRE(a[0].trials.size() == 10);
  for (size_t dom = 0; dom < a.size(); ++dom) {
    for (size_t i = 0; i < a[dom].trials.size(); ++i) {
      CHECK((a[dom].trials[i] - b[dom].trials[i]).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  CHECK(*a[0].labels == std::vector<int>{1, 1, 1, 1, 1, 2, 2, 2, 2, 2});

  cfg.seed = 43;
  auto c = synth_domains(cfg);
  CHECK((a[0].trials[0] - c[0].trials[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("domains share a random stream and differ only by rotation") {
  SynthConfig cfg;
  cfg.channels = 4;
  cfg.samples = 32;
  cfg.trials_per_class = 4;
  cfg.n_domains = 3;
  cfg.noise_scale = 0.0;  // isolate the deterministic mixing path
  auto domains = synth_domains(cfg);
  // zero rotation makes every domain identical
  SynthConfig flat = cfg;
  flat.domain_rotation_deg = 0.0;
  auto same = synth_domains(flat);
  CHECK((same[0].trials[0] - same[2].trials[0]).cwiseAbs().maxCoeff() == 0.0);
  // non-zero rotation must actually move later domains
  CHECK((domains[0].trials[0] - domains[2].trials[0]).cwiseAbs().maxCoeff() >
        0.0);
  // rotations preserve the latent energy when noiseless
  CHECK(domains[0].trials[0].norm() ==
        doctest::Approx(domains[2].trials[0].norm()).epsilon(1e-9));
}

TEST_CASE("synthetic round trip through the container") {
  SynthConfig cfg;
  cfg.channels = 3;
  cfg.samples = 16;
  cfg.trials_per_class = 3;
  cfg.n_domains = 1;
  auto domains = synth_domains(cfg);
  TempFile tmp("mekt_synth_rt.eegb");
  write_container(domains[0], tmp.path);
  DomainTrials back = read_container(tmp.path);
  CHECK(*back.labels == *domains[0].labels);
  CHECK((back.trials[2] - domains[0].trials[2]).cwiseAbs().maxCoeff() == 0.0);
}
