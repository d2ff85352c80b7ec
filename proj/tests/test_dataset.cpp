#include <gtest/gtest.h>

#include <sys/stat.h>
#include <unistd.h>

#include <random>

#include "faces.hpp"
#include "mt/dataset.hpp"
#include "test_support.hpp"

using mt::ErrorCode;
using mt::ManifestEntry;
using mt::Method;
using testing_support::TempDir;

namespace fs = std::filesystem;

namespace {

const std::string kHeader = "id,path,label,method,landmarks_path\n";

std::pair<ErrorCode, long> manifest_error(const std::string& text) {
  try {
    mt::load_manifest(text);
  } catch (const mt::Error& e) {
    return {e.code(), e.detail()};
  }
  return {ErrorCode::Io, -1};
}

// A tiny image plus sidecar copied from the corpus so perturbation succeeds.
void copy_sample(const fs::path& dir, const std::string& name, bool with_sidecar) {
  const fs::path corpus = testing_support::kDataDir / "synthetic";
  fs::copy_file(corpus / "original/original_00.png", dir / name);
  if (with_sidecar)
    fs::copy_file(corpus / "original/original_00.png.landmarks.json", dir / (name + ".landmarks.json"));
}

}  // namespace

TEST(Manifest, WellFormedRows) {
  const auto entries = mt::load_manifest(kHeader +
                                         "a,a.png,real,original,\n"
                                         "b,sub/b.png,deepfake,F2F,\n"
                                         "c,c.ppm,deepfake,NT,c.json\n"
                                         "d,d.png,deepfake,DF\n");
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0], (ManifestEntry{"a", "a.png", mt::Label::real, Method::original, std::nullopt}));
  EXPECT_EQ(entries[1].method, Method::F2F);
  EXPECT_EQ(entries[2].landmarks_path, std::optional<std::string>("c.json"));
  EXPECT_FALSE(entries[3].landmarks_path);
  EXPECT_EQ(mt::load_manifest(mt::write_manifest(entries)), entries);
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(manifest_error(kHeader + "a,a.png,real,original,\nb,b.png,fake2,F2F,\n"),
            std::make_pair(ErrorCode::UnknownLabel, 3L));
  EXPECT_EQ(manifest_error(kHeader + "a,a.png,deepfake,XX,\n"), std::make_pair(ErrorCode::UnknownMethod, 2L));
  EXPECT_EQ(manifest_error(kHeader + "a,a.png,real,original,\na,b.png,real,original,\n"),
            std::make_pair(ErrorCode::DuplicateId, 3L));
  EXPECT_EQ(manifest_error(kHeader + "a,a.png,real\n"), std::make_pair(ErrorCode::MissingColumn, 2L));
  EXPECT_EQ(manifest_error("id,path,label\na,a.png,real\n").first, ErrorCode::MissingColumn);
  EXPECT_EQ(manifest_error("").first, ErrorCode::MissingColumn);
  EXPECT_EQ(manifest_error(kHeader + "a,a.png,real,F2F,\n"), std::make_pair(ErrorCode::UnknownLabel, 2L));
  EXPECT_EQ(manifest_error(kHeader + "a,a.png,deepfake,original,\n"), std::make_pair(ErrorCode::UnknownLabel, 2L));
}

TEST(Manifest, EmptyBody) { EXPECT_TRUE(mt::load_manifest(kHeader).empty()); }

TEST(PerturbDataset, MissingSidecarsAreDiscarded) {
  TempDir in, out;
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 10; ++i) {
    const std::string name = "img" + std::to_string(i) + ".png";
    copy_sample(in.path(), name, i != 3 && i != 7);
    entries.push_back({"e" + std::to_string(i), name, mt::Label::real, Method::original, std::nullopt});
  }
  mt::PerturbOptions opt;
  opt.base_dir = in.path();
  opt.jobs = 3;
  const auto report = mt::perturb_dataset(entries, mt::default_makeup_spec(), out.path(), opt);
  EXPECT_EQ(report.produced, 8u);
  ASSERT_EQ(report.discarded.size(), 2u);
  EXPECT_EQ(report.discarded[0].id, "e3");
  EXPECT_EQ(report.discarded[1].id, "e7");
  EXPECT_NE(report.discarded[0].reason.find("Io"), std::string::npos) << report.discarded[0].reason;
  EXPECT_EQ(report.per_subset_counts.at(Method::original), 8u);
  EXPECT_EQ(report.input_count(), 10u);
  EXPECT_TRUE(fs::exists(out / "img0.png"));
  EXPECT_FALSE(fs::exists(out / "img3.png"));
}

TEST(PerturbDataset, EmptyManifest) {
  TempDir out;
  const auto report = mt::perturb_dataset({}, mt::default_makeup_spec(), out.path());
  EXPECT_EQ(report.produced, 0u);
  EXPECT_TRUE(report.discarded.empty());
}

TEST(PerturbDataset, PreservesFormatAndRelativePath) {
  TempDir in, out;
  fs::create_directories(in / "x/y");
  const auto img = faces::sample_image();
  mt::write_file(in / "x/y/a.ppm", mt::save_image(img, mt::ImageFormat::ppm));
  fs::copy_file(testing_support::kDataDir / "synthetic/original/original_00.png.landmarks.json", in / "lm.json");
  const std::vector<ManifestEntry> entries = {{"a", "x/y/a.ppm", mt::Label::real, Method::original, "lm.json"}};
  mt::PerturbOptions opt;
  opt.base_dir = in.path();
  const auto report = mt::perturb_dataset(entries, mt::default_makeup_spec(), out.path(), opt);
  ASSERT_EQ(report.produced, 1u);
  const auto bytes = mt::read_file(out / "x/y/a.ppm");
  EXPECT_EQ(mt::sniff_format(bytes), mt::ImageFormat::ppm);
  EXPECT_EQ(mt::load_image(bytes), mt::apply_makeup(img, faces::sample(), mt::default_makeup_spec()));
}

TEST(PerturbDataset, StrictModeDiscardsOutOfBoundsLandmarks) {
  const fs::path corpus = testing_support::kDataDir / "synthetic";
  const auto entries = mt::load_manifest(mt::read_text_file(corpus / "manifest.csv"));
  std::vector<ManifestEntry> nt;
  for (const auto& e : entries)
    if (e.id == "NT_03" || e.id == "NT_02") nt.push_back(e);
  ASSERT_EQ(nt.size(), 2u);
  mt::PerturbOptions opt;
  opt.base_dir = corpus;
  {
    TempDir out;
    EXPECT_EQ(mt::perturb_dataset(nt, mt::default_makeup_spec(), out.path(), opt).produced, 2u);
  }
  opt.validation = mt::ValidationMode::strict;
  TempDir out;
  const auto report = mt::perturb_dataset(nt, mt::default_makeup_spec(), out.path(), opt);
  EXPECT_EQ(report.produced, 1u);
  ASSERT_EQ(report.discarded.size(), 1u);
  EXPECT_EQ(report.discarded[0].id, "NT_03");
  EXPECT_NE(report.discarded[0].reason.find("OutOfBounds"), std::string::npos) << report.discarded[0].reason;
}

TEST(PerturbDataset, UnwritableOutputDirFailsFast) {
  if (::geteuid() == 0) {
    // Root ignores permission bits; a path below a regular file is never writable.
    TempDir tmp;
    mt::write_file(tmp / "file", std::string_view("x"));
    try {
      mt::perturb_dataset({}, mt::default_makeup_spec(), tmp / "file" / "out");
      FAIL();
    } catch (const mt::Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Io);
    }
    return;
  }
  TempDir tmp;
  fs::create_directories(tmp / "ro");
  ::chmod((tmp / "ro").c_str(), 0500);
  EXPECT_THROW(mt::perturb_dataset({}, mt::default_makeup_spec(), tmp / "ro"), mt::Error);
  ::chmod((tmp / "ro").c_str(), 0700);
}

TEST(PerturbDataset, ConservationOverRandomManifests) {
  TempDir in;
  copy_sample(in.path(), "good.png", true);
  mt::write_file(in / "bad.png", std::string_view("not an image"));
  mt::write_file(in / "bad.png.landmarks.json", mt::read_text_file(in / "good.png.landmarks.json"));
  copy_sample(in.path(), "nolm.png", false);
  const char* kinds[] = {"good.png", "bad.png", "nolm.png", "absent.png"};
  std::mt19937 rng(9);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<ManifestEntry> entries;
    const int n = rng() % 8;
    std::size_t expected_good = 0;
    for (int i = 0; i < n; ++i) {
      const int k = rng() % 4;
      expected_good += k == 0;
      entries.push_back({"id" + std::to_string(i), kinds[k], mt::Label::real, Method::original, std::nullopt});
    }
    TempDir out;
    mt::PerturbOptions opt;
    opt.base_dir = in.path();
    opt.jobs = 1 + trial % 4;
    const auto report = mt::perturb_dataset(entries, mt::default_makeup_spec(), out.path(), opt);
    EXPECT_EQ(report.produced + report.discarded.size(), entries.size());
    EXPECT_EQ(report.produced, expected_good);
    EXPECT_TRUE(std::is_sorted(report.discarded.begin(), report.discarded.end(),
                               [](const auto& a, const auto& b) { return a.id < b.id; }));
  }
}

TEST(PerturbDataset, ReportIndependentOfWorkerCount) {
  const fs::path corpus = testing_support::kDataDir / "synthetic";
  auto entries = mt::load_manifest(mt::read_text_file(corpus / "manifest.csv"));
  entries.resize(20);
  mt::PerturbOptions opt;
  opt.base_dir = corpus;
  TempDir a, b;
  opt.jobs = 1;
  const auto ra = mt::perturb_dataset(entries, mt::default_makeup_spec(), a.path(), opt);
  opt.jobs = 7;
  const auto rb = mt::perturb_dataset(entries, mt::default_makeup_spec(), b.path(), opt);
  EXPECT_EQ(mt::to_json(ra).dump(), mt::to_json(rb).dump());
  EXPECT_EQ(ra.produced_ids, rb.produced_ids);
}

TEST(Balance, TruncatesToSmallestSubset) {
  const std::map<Method, std::size_t> sizes = {
      {Method::F2F, 2700}, {Method::DF, 2653}, {Method::FS, 2639}, {Method::NT, 2641}, {Method::original, 2690}};
  mt::Subsets in;
  std::mt19937 rng(1);
  for (const auto& [m, n] : sizes) {
    for (std::size_t i = 0; i < n; ++i) in[m].push_back(std::string(mt::to_string(m)) + "_" + std::to_string(i));
    std::shuffle(in[m].begin(), in[m].end(), rng);
  }
  const auto out = mt::balance(in);
  EXPECT_EQ(out.size, 2639u);
  EXPECT_FALSE(out.empty_warning);
  for (const auto& [m, ids] : out.subsets) {
    EXPECT_EQ(ids.size(), 2639u);
    auto sorted = in.at(m);
    std::sort(sorted.begin(), sorted.end());
    sorted.resize(2639);
    EXPECT_EQ(ids, sorted);
  }
}

TEST(Balance, EqualSizesStable) {
  const mt::Subsets in = {{Method::original, {"a", "b"}}, {Method::DF, {"c", "d"}}};
  EXPECT_EQ(mt::balance(in).subsets, in);
}

TEST(Balance, EmptySubsetEmptiesAll) {
  const auto out = mt::balance({{Method::original, {"a", "b"}}, {Method::NT, {}}});
  EXPECT_TRUE(out.empty_warning);
  EXPECT_EQ(out.size, 0u);
  for (const auto& [m, ids] : out.subsets) EXPECT_TRUE(ids.empty());
}

TEST(Balance, PropertiesOnRandomInputs) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    mt::Subsets in;
    for (Method m : mt::kAllMethods) {
      if (rng() % 5 == 0) continue;
      const int n = rng() % 30;
      for (int i = 0; i < n; ++i) in[m].push_back("id" + std::to_string(rng() % 100));
    }
    const auto once = mt::balance(in);
    std::size_t min_distinct = SIZE_MAX;
    for (const auto& [m, ids] : in) min_distinct = std::min(min_distinct, std::set(ids.begin(), ids.end()).size());
    if (in.empty()) min_distinct = 0;
    EXPECT_EQ(once.size, min_distinct);
    for (const auto& [m, ids] : once.subsets) {
      EXPECT_EQ(ids.size(), once.size);
      for (const auto& id : ids) EXPECT_NE(std::find(in.at(m).begin(), in.at(m).end(), id), in.at(m).end());
    }
    EXPECT_EQ(mt::balance(once.subsets).subsets, once.subsets);
    const auto seeded = mt::balance(in, 42);
    EXPECT_EQ(seeded.size, once.size);
    EXPECT_EQ(mt::balance(in, 42).subsets, seeded.subsets);
    EXPECT_EQ(mt::balance(seeded.subsets, 42).subsets, seeded.subsets);
  }
}
