#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "icd/arcface.hpp"
#include "icd/binary_io.hpp"
#include "icd/drip.hpp"
#include "icd/embed_store.hpp"
#include "icd/ensemble.hpp"
#include "icd/eval.hpp"
#include "icd/knn.hpp"
#include "icd/pixelaug.hpp"
#include "icd/qnorm.hpp"
#include "icd/synth.hpp"

namespace icd::cli {

namespace {

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_neighbors(const std::vector<NeighborList>& lists, const std::string& path) {
  std::ostringstream ss;
  ss << "query_id,rank,corpus_id,similarity\n";
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.neighbors.size(); ++r) {
      ss << list.query_id << ',' << r + 1 << ',' << list.neighbors[r].id << ','
         << format_g9(list.neighbors[r].similarity) << '\n';
    }
  }
  binary::write_file(path, ss.str());
}

std::array<int, 3> parse_permutation(const std::string& text) {
  std::array<int, 3> p{};
  char c0 = 0, c1 = 0;
  std::istringstream ss(text);
  if (!(ss >> p[0] >> c0 >> p[1] >> c1 >> p[2]) || c0 != ',' || c1 != ',' || !ss.eof()) {
    throw DomainError("--permutation expects three comma-separated channel indices, e.g. 2,1,0");
  }
  return p;
}

std::array<ChannelOffset, 3> parse_offsets(const std::vector<int>& values) {
  if (values.size() != 6) throw DomainError("--offsets expects six integers: dx_r dy_r dx_g dy_g dx_b dy_b");
  std::array<ChannelOffset, 3> o;
  for (std::size_t c = 0; c < 3; ++c) o[c] = {values[2 * c], values[2 * c + 1]};
  return o;
}

/// Per-query neg_sq_euclid scores to the n closest training rows, aligned with `query_ids`.
ScoreLists training_scores(const EmbeddingSetF& queries, const EmbeddingSetF& training, std::size_t n,
                           unsigned threads) {
  const auto lists = top_k(queries, training, n, Metric::neg_sq_euclid, threads);
  ScoreLists out(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (const auto& nb : lists[i].neighbors) out[i].push_back(nb.similarity);
  }
  return out;
}

ScoredPairs normalize_pair_scores(const ScoredPairs& pairs, const EmbeddingSetF& queries,
                                  const EmbeddingSetF& training, const ScoreNormConfig& config, unsigned threads) {
  config.validate();
  const ScoreLists train = training_scores(queries, training, config.n, threads);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < queries.size(); ++i) row_of.emplace(queries.id(i), i);

  // Group pair scores by query row, normalize, then scatter back in input order.
  ScoreLists raw(queries.size());
  std::vector<std::pair<std::size_t, std::size_t>> slot;
  for (const auto& e : pairs.entries()) {
    const auto it = row_of.find(e.query_id);
    if (it == row_of.end()) throw ValidationError("pair query '" + e.query_id + "' not in query embeddings");
    slot.emplace_back(it->second, raw[it->second].size());
    raw[it->second].push_back(e.score);
  }
  const ScoreLists shifted = normalize_scores(raw, train, config);
  std::vector<ScoredPair> entries;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& e = pairs.entries()[k];
    entries.push_back({e.query_id, e.reference_id, shifted[slot[k].first][slot[k].second]});
  }
  return ScoredPairs(std::move(entries));
}

struct Options {
  unsigned threads = 0;
  std::uint64_t seed = 0;

  std::vector<std::string> inputs;
  std::string input, output, model, training, queries, corpus, references, pairs, gt, trajectory, output_dir;

  Eigen::Index out_dim = 256;
  bool whiten = true;
  bool renormalize = true;

  std::size_t k = kDefaultScoreK;
  std::string metric = "cosine";

  std::string method;
  std::optional<double> beta;
  std::size_t n_sim = 3;
  std::optional<std::size_t> n_dir;
  double alpha = 1.0;
  std::size_t n = 3;

  DripSchedule schedule;
  Eigen::Index dim = 32;
  double sigma = 0.1;

  std::string op;
  int channel = 0;
  std::string permutation = "2,1,0";
  std::vector<int> offsets;
  bool wrap = false;

  SynthConfig synth;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Image copy detection embedding toolkit", "icd"};
  app.require_subcommand(1);
  Options o;
  o.seed = kDefaultSynthSeed;

  const auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it");
  };

  auto* concat = app.add_subcommand("concat", "Concatenate per-model embeddings row by row");
  concat->add_option("--inputs", o.inputs, "EMB1 files with identical id lists")->required()->expected(1, -1);
  concat->add_option("--output", o.output, "Output EMB1 file")->required();

  auto* pca_fit = app.add_subcommand("pca-fit", "Fit a PCA projection on training embeddings");
  pca_fit->add_option("--training", o.training, "Training EMB1 file")->required();
  pca_fit->add_option("--out_dim", o.out_dim, "Number of principal axes kept")->capture_default_str();
  pca_fit->add_option("--output", o.output, "Output PCA1 file")->required();

  auto* pca_apply = app.add_subcommand("pca-apply", "Project, whiten and L2-normalize embeddings");
  pca_apply->add_option("--model", o.model, "PCA1 file")->required();
  pca_apply->add_option("--input", o.input, "Input EMB1 file")->required();
  pca_apply->add_option("--output", o.output, "Output EMB1 file")->required();
  pca_apply->add_flag("--whiten,!--no-whiten", o.whiten, "Divide by sqrt(eigenvalue) (default on)");
  pca_apply->add_flag("--renormalize,!--no-renormalize", o.renormalize, "Final L2 normalization (default on)");
  add_threads(pca_apply);

  auto* knn = app.add_subcommand("knn", "Exact top-k neighbors");
  knn->add_option("--queries", o.queries, "Query EMB1 file")->required();
  knn->add_option("--corpus", o.corpus, "Corpus EMB1 file")->required();
  knn->add_option("--k", o.k, "Neighbors per query")->capture_default_str();
  knn->add_option("--metric", o.metric, "cosine | neg_sq_euclid")
      ->check(CLI::IsMember({"cosine", "neg_sq_euclid"}))
      ->capture_default_str();
  knn->add_option("--output", o.output, "Output CSV query_id,rank,corpus_id,similarity")->required();
  add_threads(knn);

  auto* normalize = app.add_subcommand("normalize", "Query normalization against training embeddings");
  normalize->add_option("--method", o.method, "1 | 2 | scores")->required()->check(CLI::IsMember({"1", "2", "scores"}));
  normalize->add_option("--queries", o.queries, "Query EMB1 file")->required();
  normalize->add_option("--training", o.training, "Training EMB1 file")->required();
  normalize->add_option("--output", o.output, "Output EMB1 file (methods 1, 2) or pairs CSV (scores)")->required();
  normalize->add_option("--beta", o.beta, "Displacement factor (default 2.0 for method 1, 1.8 for method 2)");
  normalize->add_option("--n_sim", o.n_sim, "Training neighbors averaged for the mean similarity")->capture_default_str();
  normalize->add_option("--n_dir", o.n_dir, "Training neighbors used for the direction (method 2, default 100)");
  normalize->add_option("--pairs", o.pairs, "Scored pairs CSV to normalize (scores method)");
  normalize->add_option("--alpha", o.alpha, "Score shift factor (scores method)")->capture_default_str();
  normalize->add_option("--n", o.n, "Training scores averaged per query (scores method)")->capture_default_str();
  add_threads(normalize);

  auto* score = app.add_subcommand("score", "Score each query's top-k references by -||q - r||^2");
  score->add_option("--queries", o.queries, "Query EMB1 file")->required();
  score->add_option("--references", o.references, "Reference EMB1 file")->required();
  score->add_option("--k", o.k, "References submitted per query")->capture_default_str();
  score->add_option("--output", o.output, "Output CSV query_id,reference_id,score")->required();
  add_threads(score);

  auto* eval = app.add_subcommand("eval", "Micro average precision of scored pairs");
  eval->add_option("--pairs", o.pairs, "Scored pairs CSV")->required();
  eval->add_option("--gt", o.gt, "Ground truth CSV query_id,reference_id")->required();

  auto* drip = app.add_subcommand("drip-sim", "Drip training of an ArcFace head over a synthetic embedder");
  drip->add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
  drip->add_option("--sigma", o.sigma, "Augmentation noise of the synthetic embedder")->capture_default_str();
  drip->add_option("--initial_classes", o.schedule.initial_classes)->capture_default_str();
  drip->add_option("--growth_factor", o.schedule.growth_factor)->capture_default_str();
  drip->add_option("--target_classes", o.schedule.target_classes)->capture_default_str();
  drip->add_option("--loss_threshold", o.schedule.loss_threshold)->capture_default_str();
  drip->add_option("--steps_per_stage", o.schedule.steps_per_stage)->capture_default_str();
  drip->add_option("--learning_rate", o.schedule.learning_rate)->capture_default_str();
  drip->add_option("--num_augmentations", o.schedule.num_augmentations)->capture_default_str();
  drip->add_flag("--reseed_all", o.schedule.reseed_all, "Re-seed retained classes at every stage");
  drip->add_option("--margin", o.schedule.margin)->capture_default_str();
  drip->add_option("--scale", o.schedule.scale)->capture_default_str();
  drip->add_option("--seed", o.seed, "Seed for embedder, augmentations and random baseline")->capture_default_str();
  drip->add_option("--output", o.output, "Output ARC1 head file")->required();
  drip->add_option("--trajectory", o.trajectory, "Output CSV stage,step,loss");
  add_threads(drip);

  auto* augment = app.add_subcommand("augment", "Channel augmentations on a binary PPM image");
  augment->add_option("--op", o.op, "invert | swap | shift")->required()->check(CLI::IsMember({"invert", "swap", "shift"}));
  augment->add_option("--input", o.input, "Input P6 PPM")->required();
  augment->add_option("--output", o.output, "Output P6 PPM")->required();
  augment->add_option("--channel", o.channel, "Channel to invert (0, 1, 2)")->capture_default_str();
  augment->add_option("--permutation", o.permutation, "Source channel for each output channel")->capture_default_str();
  augment->add_option("--offsets", o.offsets, "dx_r dy_r dx_g dy_g dx_b dy_b")->expected(6);
  augment->add_flag("--wrap", o.wrap, "Wrap shifted content around instead of zero fill");

  auto* synth = app.add_subcommand("synth-bench", "Generate the synthetic copy-detection benchmark");
  synth->add_option("--output_dir", o.output_dir, "Directory for references/training/queries.emb and gt.csv")->required();
  synth->add_option("--seed", o.seed)->capture_default_str();
  synth->add_option("--dim", o.synth.dim)->capture_default_str();
  synth->add_option("--references", o.synth.references)->capture_default_str();
  synth->add_option("--training", o.synth.training)->capture_default_str();
  synth->add_option("--copies", o.synth.copies)->capture_default_str();
  synth->add_option("--distractors", o.synth.distractors)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: usage: " << msg << "\n";
    return kExitUsage;
  }

  try {
    if (concat->parsed()) {
      std::vector<EmbeddingSetF> sets;
      for (const auto& path : o.inputs) sets.push_back(load_embeddings(path));
      save_embeddings(concat_embeddings(sets), o.output);
    } else if (pca_fit->parsed()) {
      save_projection(fit_projection(load_embeddings(o.training), o.out_dim), o.output);
    } else if (pca_apply->parsed()) {
      const auto model = load_projection(o.model);
      save_embeddings(apply_projection(model, load_embeddings(o.input), {o.whiten, o.renormalize}, o.threads),
                      o.output);
    } else if (knn->parsed()) {
      const auto metric = *parse_metric(o.metric);
      write_neighbors(top_k(load_embeddings(o.queries), load_embeddings(o.corpus), o.k, metric, o.threads), o.output);
    } else if (normalize->parsed()) {
      const auto queries = load_embeddings(o.queries);
      const auto training = load_embeddings(o.training);
      if (o.method == "scores") {
        if (o.pairs.empty()) throw DomainError("normalize --method scores requires --pairs");
        const ScoreNormConfig config{o.alpha, o.n};
        save_scored_pairs(normalize_pair_scores(load_scored_pairs(o.pairs), queries, training, config, o.threads),
                          o.output);
      } else if (o.method == "1") {
        NormalizationConfig config = NormalizationConfig::method1();
        config.beta = o.beta.value_or(config.beta);
        config.n_sim = o.n_sim;
        config.n_dir = o.n_dir.value_or(o.n_sim);
        save_embeddings(normalize_method1(queries, training, config, o.threads), o.output);
      } else {
        NormalizationConfig config = NormalizationConfig::method2();
        config.beta = o.beta.value_or(config.beta);
        config.n_sim = o.n_sim;
        config.n_dir = o.n_dir.value_or(config.n_dir);
        save_embeddings(normalize_method2(queries, training, config, o.threads), o.output);
      }
    } else if (score->parsed()) {
      if (o.k == 0) throw DomainError("--k must be >= 1");
      save_scored_pairs(score_pairs(load_embeddings(o.queries), load_embeddings(o.references), o.k, o.threads),
                        o.output);
    } else if (eval->parsed()) {
      const double ap = micro_ap(load_scored_pairs(o.pairs), load_ground_truth(o.gt));
      char buf[64];
      std::snprintf(buf, sizeof buf, "muAP=%.9f", ap);
      out << buf << "\n";
    } else if (drip->parsed()) {
      const SyntheticEmbedder embedder(o.dim, o.seed, o.sigma);
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < o.schedule.target_classes; ++i) ids.push_back("S" + std::to_string(i));
      const DripResult result = drip_train(embedder, ids, o.schedule, o.seed, o.threads);
      save_head(result.head, o.output);
      if (!o.trajectory.empty()) {
        std::ostringstream ss;
        write_trajectory(result.trajectory, ss);
        binary::write_file(o.trajectory, ss.str());
      }
      for (const auto& s : result.stages) {
        out << "stage=" << s.stage << " classes=" << s.classes << " steps=" << s.steps
            << " opening_loss=" << format_g9(s.opening_loss) << " random_init_loss=" << format_g9(s.random_init_loss)
            << " final_loss=" << format_g9(s.final_loss) << " converged=" << (s.converged ? 1 : 0) << "\n";
      }
    } else if (augment->parsed()) {
      const RgbImage img = read_ppm(o.input);
      RgbImage result;
      if (o.op == "invert") {
        result = invert_channel(img, o.channel);
      } else if (o.op == "swap") {
        result = swap_channels(img, parse_permutation(o.permutation));
      } else {
        result = shift_channels(img, parse_offsets(o.offsets), o.wrap ? ShiftMode::wrap : ShiftMode::zero_fill);
      }
      write_ppm(result, o.output);
    } else if (synth->parsed()) {
      const auto bench = generate_benchmark(o.synth, o.seed);
      const std::filesystem::path dir(o.output_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IoError("cannot create '" + o.output_dir + "': " + ec.message());
      save_embeddings(bench.references, (dir / "references.emb").string());
      save_embeddings(bench.training, (dir / "training.emb").string());
      save_embeddings(bench.queries, (dir / "queries.emb").string());
      save_ground_truth(bench.ground_truth, (dir / "gt.csv").string());
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return kExitModuleError;
  }
  return kExitOk;
}

}  // namespace icd::cli
