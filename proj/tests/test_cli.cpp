#include <doctest.h>

#include <fstream>

#include "icd/embed_store.hpp"
#include "icd/eval.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using pipeline::invoke;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("cli: eval on a hand fixture") {
  const auto dir = oracle::scratch_dir("cli_eval");
  write_text(dir / "pairs.csv", "query_id,reference_id,score\nq1,r1,0.9\nq2,r9,0.8\nq2,r2,0.7\n");
  write_text(dir / "gt.csv", "query_id,reference_id\nq1,r1\nq2,r2\nq3,\n");
  std::string out, err;
  CHECK(invoke({"eval", "--pairs", (dir / "pairs.csv").string(), "--gt", (dir / "gt.csv").string()}, &out, &err) == 0);
  CHECK(out == "muAP=0.833333333\n");
  CHECK(err.empty());
}

TEST_CASE("cli: exit codes") {
  std::string out, err;
  CHECK(invoke({"frobnicate"}, &out, &err) == 2);
  CHECK(err.rfind("error: usage:", 0) == 0);
  CHECK(invoke({"knn", "--queries", "a.emb"}, &out, &err) == 2);
  CHECK(invoke({"knn", "--queries", "a", "--corpus", "b", "--metric", "manhattan", "--output", "c"}, &out, &err) == 2);

  CHECK(invoke({"eval", "--pairs", "/nonexistent/p.csv", "--gt", "/nonexistent/g.csv"}, &out, &err) == 1);
  CHECK(err.rfind("error: ", 0) == 0);
  CHECK(err.find('\n') == err.size() - 1);

  const auto dir = oracle::scratch_dir("cli_errors");
  write_text(dir / "bad.emb", "NOPE");
  CHECK(invoke({"knn", "--queries", (dir / "bad.emb").string(), "--corpus", (dir / "bad.emb").string(), "--output",
                (dir / "o.csv").string()},
               &out, &err) == 1);
  CHECK(err.find("format error") != std::string::npos);
  CHECK(invoke({"augment", "--op", "swap", "--permutation", "0,0,1", "--input", (dir / "x.ppm").string(), "--output",
                (dir / "y.ppm").string()},
               &out, &err) == 1);
}

TEST_CASE("cli: full pipeline is deterministic") {
  const auto a = pipeline::run_all(oracle::scratch_dir("cli_run_a"));
  const auto b = pipeline::run_all(oracle::scratch_dir("cli_run_b"));
  CHECK(a.files.size() == b.files.size());
  for (const auto& [name, bytes] : a.files) {
    INFO(name);
    REQUIRE(b.files.count(name) == 1);
    CHECK(bytes == b.files.at(name));
  }
  CHECK(a.stdout == b.stdout);
  CHECK(a.stdout.at("eval").rfind("muAP=", 0) == 0);
  CHECK(a.files.count("refs_pca.emb") == 1);
  CHECK(a.files.at("knn.csv").rfind("query_id,rank,corpus_id,similarity\n", 0) == 0);

  const auto dir = oracle::scratch_dir("cli_check");
  icd::binary::write_file((dir / "refs_pca.emb").string(), a.files.at("refs_pca.emb"));
  const auto projected = icd::load_embeddings((dir / "refs_pca.emb").string());
  CHECK(projected.dim() == 16);
  CHECK(projected.size() == 120);
}

TEST_CASE("cli: augment matches the library") {
  const auto dir = oracle::scratch_dir("cli_aug");
  const icd::RgbImage img(2, 1, {10, 20, 30, 40, 50, 60});
  icd::write_ppm(img, (dir / "in.ppm").string());
  CHECK(invoke({"augment", "--op", "invert", "--channel", "0", "--input", (dir / "in.ppm").string(), "--output",
                (dir / "out.ppm").string()}) == 0);
  CHECK(icd::read_ppm((dir / "out.ppm").string()) == icd::RgbImage(2, 1, {245, 20, 30, 215, 50, 60}));
  CHECK(invoke({"augment", "--op", "shift", "--offsets", "1", "0", "0", "0", "0", "0", "--input",
                (dir / "in.ppm").string(), "--output", (dir / "out.ppm").string()}) == 0);
  CHECK(icd::read_ppm((dir / "out.ppm").string()) == icd::RgbImage(2, 1, {0, 20, 30, 10, 50, 60}));
}
