#include "chal/data.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

using namespace chal;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "chal_data_test";
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

std::vector<unsigned char> image_file(std::uint32_t count, std::uint32_t rows,
                                      std::uint32_t cols,
                                      const std::vector<unsigned char>& pixels) {
  std::vector<unsigned char> out;
  push_u32(out, 0x803);
  push_u32(out, count);
  push_u32(out, rows);
  push_u32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<unsigned char> label_file(const std::vector<unsigned char>& labels) {
  std::vector<unsigned char> out;
  push_u32(out, 0x801);
  push_u32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace

TEST_CASE("load_idx decodes a hand-built big-endian pair") {
  const fs::path dir = scratch_dir();
  write_bytes(dir / "im", image_file(2, 2, 2, {0, 255, 128, 64,  //
                                               10, 20, 30, 40}));
  write_bytes(dir / "lb", label_file({3, 7}));

  Dataset ds = load_idx((dir / "im").string(), (dir / "lb").string());
  CHECK(ds.size() == 2);
  CHECK(ds.classes == 8);
  CHECK(ds.sample_shape() == std::vector<std::size_t>{1, 2, 2});
  CHECK(ds.labels == std::vector<std::size_t>{3, 7});
  CHECK(ds.inputs[0] == 0.0);
  CHECK(ds.inputs[1] == 1.0);
  CHECK(ds.inputs[2] == 128.0 / 255.0);
  CHECK(ds.inputs[3] == 64.0 / 255.0);
  CHECK(ds.inputs[4] == 10.0 / 255.0);
}

TEST_CASE("load_idx reports the failure kind") {
  const fs::path dir = scratch_dir();
  const auto images = image_file(2, 2, 2, std::vector<unsigned char>(8, 1));
  const auto labels = label_file({1, 0});
  write_bytes(dir / "im", images);
  write_bytes(dir / "lb", labels);

  SUBCASE("swapped magics") {
    try {
      load_idx((dir / "lb").string(), (dir / "im").string());
      FAIL("expected IdxError");
    } catch (const IdxError& e) {
      CHECK(e.kind() == IdxError::Kind::bad_magic);
    }
  }
  SUBCASE("short pixel payload") {
    auto cut = images;
    cut.pop_back();
    write_bytes(dir / "im_cut", cut);
    try {
      load_idx((dir / "im_cut").string(), (dir / "lb").string());
      FAIL("expected IdxError");
    } catch (const IdxError& e) {
      CHECK(e.kind() == IdxError::Kind::truncated);
    }
  }
  SUBCASE("header shorter than its own fields") {
    write_bytes(dir / "im_hdr", {0, 0, 8, 3, 0, 0});
    CHECK_THROWS_AS(
        load_idx((dir / "im_hdr").string(), (dir / "lb").string()), IdxError);
  }
  SUBCASE("image and label counts disagree") {
    write_bytes(dir / "lb3", label_file({1, 0, 1}));
    try {
      load_idx((dir / "im").string(), (dir / "lb3").string());
      FAIL("expected IdxError");
    } catch (const IdxError& e) {
      CHECK(e.kind() == IdxError::Kind::count_mismatch);
    }
  }
}

TEST_CASE("save_idx then load_idx is lossless on quantized values") {
  const fs::path dir = scratch_dir();
  Dataset ds;
  ds.inputs = Tensor({3, 1, 2, 2});
  Rng rng(17);
  for (double& v : ds.inputs.values()) {
    v = static_cast<double>(rng.below(256)) / 255.0;
  }
  ds.labels = {0, 2, 1};
  ds.classes = 3;
  ds.validate();

  save_idx(ds, (dir / "rt_im").string(), (dir / "rt_lb").string());
  Dataset back = load_idx((dir / "rt_im").string(), (dir / "rt_lb").string());
  CHECK(back.labels == ds.labels);
  REQUIRE(back.inputs.size() == ds.inputs.size());
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    CHECK(back.inputs[i] == ds.inputs[i]);
  }

  // a second save produces byte-identical files
  save_idx(back, (dir / "rt_im2").string(), (dir / "rt_lb2").string());
  CHECK(read_bytes(dir / "rt_im2") == read_bytes(dir / "rt_im"));
  CHECK(read_bytes(dir / "rt_lb2") == read_bytes(dir / "rt_lb"));
}

TEST_CASE("gzip files are produced and sniffed transparently") {
  const fs::path dir = scratch_dir();
  Dataset ds;
  ds.inputs = Tensor({2, 1, 3, 3});
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    ds.inputs[i] = static_cast<double>(i * 13 % 256) / 255.0;
  }
  ds.labels = {1, 0};
  ds.classes = 2;

  save_idx(ds, (dir / "z_im.gz").string(), (dir / "z_lb.gz").string());
  const auto zipped = read_bytes(dir / "z_im.gz");
  REQUIRE(zipped.size() >= 2);
  CHECK(zipped[0] == 0x1f);
  CHECK(zipped[1] == 0x8b);

  Dataset back = load_idx((dir / "z_im.gz").string(), (dir / "z_lb.gz").string());
  CHECK(back.labels == ds.labels);
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    CHECK(back.inputs[i] == ds.inputs[i]);
  }
}

namespace {

Dataset interleaved_dataset(std::size_t classes, std::size_t per_class) {
  Dataset ds;
  const std::size_t n = classes * per_class;
  ds.inputs = Tensor({n, 2});
  ds.labels.resize(n);
  ds.classes = classes;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = i % classes;
    ds.inputs.row(i)[0] = static_cast<double>(i) / static_cast<double>(n);
    ds.inputs.row(i)[1] = 0.5;
  }
  return ds;
}

}  // namespace

TEST_CASE("tiny_subset balances classes and keeps dataset order") {
  Dataset ds = interleaved_dataset(3, 8);
  Dataset tiny = tiny_subset(ds, 3, 42);
  CHECK(tiny.size() == 9);
  CHECK(tiny.classes == 3);

  std::map<std::size_t, int> hist;
  for (std::size_t label : tiny.labels) hist[label] += 1;
  for (std::size_t c = 0; c < 3; ++c) CHECK(hist[c] == 3);

  // rows keep their original relative order: the first feature encodes the
  // source index, so it must be strictly increasing
  for (std::size_t i = 1; i < tiny.size(); ++i) {
    CHECK(tiny.inputs.row(i)[0] > tiny.inputs.row(i - 1)[0]);
  }

  Dataset again = tiny_subset(ds, 3, 42);
  CHECK(again.labels == tiny.labels);
  for (std::size_t i = 0; i < tiny.inputs.size(); ++i) {
    CHECK(again.inputs[i] == tiny.inputs[i]);
  }

  Dataset other = tiny_subset(ds, 3, 43);
  bool differs = other.labels != tiny.labels;
  for (std::size_t i = 0; i < tiny.inputs.size() && !differs; ++i) {
    differs = other.inputs[i] != tiny.inputs[i];
  }
  CHECK(differs);

  CHECK(tiny_subset(ds, 0, 1).size() == 0);
  CHECK_THROWS_WITH_AS(tiny_subset(ds, 9, 1) /* only 8 per class */,
                       doctest::Contains("class"), std::invalid_argument);
}

namespace {

// independent linear separability oracle
bool perceptron_separates(const Dataset& ds) {
  REQUIRE(ds.classes == 2);
  const std::size_t d = ds.sample_size();
  std::vector<double> w(d + 1, 0.0);
  for (int epoch = 0; epoch < 2000; ++epoch) {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * ds.inputs.row(i)[j];
      const double target = ds.labels[i] == 1 ? 1.0 : -1.0;
      if (z * target <= 0) {
        errors += 1;
        for (std::size_t j = 0; j < d; ++j) {
          w[j] += target * ds.inputs.row(i)[j];
        }
        w[d] += target;
      }
    }
    if (errors == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("synth_blobs builds balanced clusters inside the unit box") {
  Dataset ds = synth_blobs(3, 20, 2, 6.0, 5);
  CHECK(ds.size() == 60);
  CHECK(ds.classes == 3);
  CHECK(ds.sample_shape() == std::vector<std::size_t>{2});
  std::map<std::size_t, int> hist;
  for (std::size_t label : ds.labels) hist[label] += 1;
  for (std::size_t c = 0; c < 3; ++c) CHECK(hist[c] == 20);
  for (double v : ds.inputs.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  Dataset same = synth_blobs(3, 20, 2, 6.0, 5);
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    CHECK(same.inputs[i] == ds.inputs[i]);
  }
  Dataset other = synth_blobs(3, 20, 2, 6.0, 6);
  bool differs = false;
  for (std::size_t i = 0; i < ds.inputs.size() && !differs; ++i) {
    differs = other.inputs[i] != ds.inputs[i];
  }
  CHECK(differs);

  CHECK_THROWS_AS(synth_blobs(0, 5, 2, 6.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_blobs(2, 5, 0, 6.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_blobs(2, 5, 2, 0.0, 1), std::invalid_argument);
}

TEST_CASE("widely separated blobs are linearly separable") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Dataset ds = synth_blobs(2, 25, 2, 10.0, seed);
    CHECK(perceptron_separates(ds));
  }
}

TEST_CASE("batch_indices partitions a shuffled permutation") {
  auto plan = batch_indices(30, 8, 99);
  REQUIRE(plan.size() == 4);
  CHECK(plan[0].size() == 8);
  CHECK(plan[1].size() == 8);
  CHECK(plan[2].size() == 8);
  CHECK(plan[3].size() == 6);

  std::vector<std::size_t> flat;
  for (const auto& chunk : plan) {
    flat.insert(flat.end(), chunk.begin(), chunk.end());
  }
  std::vector<std::size_t> sorted = flat;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(30);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);
  CHECK(flat != iota);  // the permutation actually shuffles

  CHECK(batch_indices(30, 8, 99) == plan);
  CHECK(batch_indices(30, 8, 100) != plan);
  CHECK(batch_indices(5, 8, 1).size() == 1);
  CHECK_THROWS_AS(batch_indices(30, 0, 1), std::invalid_argument);
}

TEST_CASE("gather materializes the addressed rows") {
  Dataset ds = interleaved_dataset(2, 4);
  Batch batch = gather(ds, {5, 0, 2});
  CHECK(batch.indices == std::vector<std::size_t>{5, 0, 2});
  CHECK(batch.labels == std::vector<std::size_t>{1, 0, 0});
  REQUIRE(batch.inputs.dim(0) == 3);
  CHECK(batch.inputs.row(0)[0] == ds.inputs.row(5)[0]);
  CHECK(batch.inputs.row(1)[0] == ds.inputs.row(0)[0]);
  CHECK(batch.inputs.row(2)[0] == ds.inputs.row(2)[0]);

  CHECK_THROWS_AS(gather(ds, {}), std::invalid_argument);
  CHECK_THROWS_AS(gather(ds, {8}), std::invalid_argument);
}

TEST_CASE("dataset validation rejects malformed collections") {
  Dataset ds = interleaved_dataset(2, 3);
  ds.validate();

  Dataset bad_label = ds;
  bad_label.labels[0] = 2;
  CHECK_THROWS_AS(bad_label.validate(), std::invalid_argument);

  Dataset bad_range = ds;
  bad_range.inputs[0] = 1.5;
  CHECK_THROWS_AS(bad_range.validate(), std::invalid_argument);

  Dataset bad_count = ds;
  bad_count.labels.pop_back();
  CHECK_THROWS_AS(bad_count.validate(), std::invalid_argument);
}
