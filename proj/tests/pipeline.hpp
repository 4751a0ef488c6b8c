// Runs every CLI subcommand once over a small generated benchmark.
#ifndef ICD_TESTS_PIPELINE_HPP
#define ICD_TESTS_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../tools/cli.hpp"
#include "icd/binary_io.hpp"
#include "icd/pixelaug.hpp"

namespace pipeline {

struct Run {
  std::map<std::string, std::string> files;   // output file name -> bytes
  std::map<std::string, std::string> stdout;  // subcommand -> captured stdout
};

inline int invoke(const std::vector<std::string>& args, std::string* out_text = nullptr,
                  std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = icd::cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

/// Every subcommand, in pipeline order, writing under `dir`. Throws on any
/// non-zero exit.
inline Run run_all(const std::filesystem::path& dir) {
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };

  Run run;
  const auto step = [&](const std::string& name, const std::vector<std::string>& args) {
    std::string out, err;
    if (invoke(args, &out, &err) != 0) throw std::runtime_error(name + " failed: " + err);
    run.stdout[name] = out;
  };

  step("synth-bench", {"synth-bench", "--output_dir", p("bench"), "--seed", "7", "--dim", "24", "--references", "120",
                       "--training", "60", "--copies", "20", "--distractors", "20"});
  const std::string refs = p("bench/references.emb"), train = p("bench/training.emb"), queries = p("bench/queries.emb");
  step("concat", {"concat", "--inputs", refs, refs, "--output", p("refs2.emb")});
  step("pca-fit", {"pca-fit", "--training", train, "--out_dim", "16", "--output", p("pca.bin")});
  step("pca-apply", {"pca-apply", "--model", p("pca.bin"), "--input", refs, "--output", p("refs_pca.emb")});
  step("knn", {"knn", "--queries", queries, "--corpus", refs, "--k", "5", "--metric", "cosine", "--output",
               p("knn.csv")});
  step("normalize-1", {"normalize", "--method", "1", "--queries", queries, "--training", train, "--output",
                       p("q1.emb")});
  step("normalize-2", {"normalize", "--method", "2", "--queries", queries, "--training", train, "--n_dir", "20",
                       "--output", p("q2.emb")});
  step("score", {"score", "--queries", p("q2.emb"), "--references", refs, "--k", "10", "--output", p("pairs.csv")});
  step("normalize-scores", {"normalize", "--method", "scores", "--queries", queries, "--training", train, "--pairs",
                            p("pairs.csv"), "--alpha", "1.0", "--n", "3", "--output", p("pairs_norm.csv")});
  step("eval", {"eval", "--pairs", p("pairs.csv"), "--gt", p("bench/gt.csv")});
  step("drip-sim", {"drip-sim", "--dim", "16", "--initial_classes", "8", "--target_classes", "16",
                    "--steps_per_stage", "10", "--seed", "3", "--output", p("head.arc"), "--trajectory",
                    p("traj.csv")});

  std::vector<std::uint8_t> px;
  for (int i = 0; i < 4 * 3 * 3; ++i) px.push_back(static_cast<std::uint8_t>(i * 7));
  icd::write_ppm(icd::RgbImage(4, 3, px), p("img.ppm"));
  step("augment-invert", {"augment", "--op", "invert", "--channel", "1", "--input", p("img.ppm"), "--output",
                          p("inv.ppm")});
  step("augment-swap", {"augment", "--op", "swap", "--permutation", "2,0,1", "--input", p("img.ppm"), "--output",
                        p("swap.ppm")});
  step("augment-shift", {"augment", "--op", "shift", "--offsets", "1", "0", "0", "-1", "2", "1", "--input",
                         p("img.ppm"), "--output", p("shift.ppm")});

  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      run.files[std::filesystem::relative(entry.path(), dir).string()] = icd::binary::read_file(entry.path().string());
    }
  }
  return run;
}

}  // namespace pipeline

#endif  // ICD_TESTS_PIPELINE_HPP
