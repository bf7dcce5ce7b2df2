#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "markstab/benchgen.hpp"
#include "markstab/embed.hpp"
#include "markstab/gbm.hpp"
#include "markstab/graph.hpp"
#include "markstab/labeler.hpp"
#include "markstab/manifest.hpp"
#include "markstab/parallel.hpp"
#include "markstab/pipeline.hpp"
#include "markstab/preprocess.hpp"
#include "markstab/scalescan.hpp"
#include "markstab/simeval.hpp"
#include "markstab/statcompare.hpp"

namespace fs = std::filesystem;
using namespace markstab;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

int env_jobs() {
  if (const char* env = std::getenv("MARKSTAB_JOBS")) {
    int j = std::atoi(env);
    if (j >= 1) return j;
  }
  return default_jobs();
}

void add_jobs_flag(CLI::App* cmd, int& jobs) {
  jobs = env_jobs();
  cmd->add_option("--jobs", jobs, "worker threads (env MARKSTAB_JOBS)")
      ->check(CLI::PositiveNumber);
}

struct ScanFlags {
  ScanConfig cfg;
  std::string constructor = "continuous";

  ScanConfig resolved() const {
    ScanConfig out = cfg;
    out.constructor = constructor == "linearized"
                          ? ConstructorKind::kLinearized
                          : ConstructorKind::kContinuousNormalized;
    return out;
  }
};

void add_scan_flags(CLI::App* cmd, ScanFlags& flags) {
  cmd->add_option("--t-min", flags.cfg.log10_t_min, "log10 of smallest scale");
  cmd->add_option("--t-max", flags.cfg.log10_t_max, "log10 of largest scale");
  cmd->add_option("--n-scales", flags.cfg.n_scales, "scales in the sweep");
  cmd->add_option("--n-tries", flags.cfg.n_tries,
                  "optimizer runs per scale");
  cmd->add_option("--window", flags.cfg.window,
                  "persistence window in grid steps");
  cmd->add_option("--repro-threshold", flags.cfg.reproducibility_threshold,
                  "max ensemble NVI for a robust scale");
  cmd->add_option("--constructor", flags.constructor,
                  "quality constructor")
      ->check(CLI::IsMember({"continuous", "linearized"}));
}

// numeric results print as e.g. 1.0 / 0.5 / 0.123456789012
std::string format_metric(double v) {
  if (std::abs(v - std::round(v)) < 1e-12) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << v;
    return out.str();
  }
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

std::vector<std::pair<int, fs::path>> list_corpus(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw ParseError("corpus directory not found: " + dir);
  std::regex pattern(R"(g_(\d+)\.edges)");
  std::vector<std::pair<int, fs::path>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern))
      out.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  if (out.empty())
    throw ParseError("no g_<i>.edges files in " + dir);
  std::sort(out.begin(), out.end());
  return out;
}

RunManifest base_manifest(const std::string& command,
                          const std::vector<std::string>& argv) {
  RunManifest m;
  m.command = command;
  m.argv = argv;
  return m;
}

// ---- subcommand bodies ----

int cmd_generate(const std::vector<std::string>& argv, int count,
                 const std::string& mode, std::uint64_t master_seed,
                 const std::string& out_dir, int n_lo, int n_hi, int jobs) {
  Timer timer;
  CorpusRanges ranges =
      mode == "train" ? CorpusRanges::training() : CorpusRanges::testing();
  if (n_lo > 0) ranges.n_lo = n_lo;
  if (n_hi > 0) ranges.n_hi = n_hi;
  auto instances = corpus(count, ranges, master_seed, jobs);

  fs::create_directories(out_dir);
  RunManifest manifest = base_manifest("generate", argv);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    std::string stem = out_dir + "/g_" + std::to_string(i);
    save_edge_list(inst.graph, stem + ".edges");
    save_partition(inst.planted, stem + ".planted.json");
    nlohmann::json sj;
    sj["n"] = inst.spec.n;
    sj["degree_exponent"] = inst.spec.degree_exponent;
    sj["d_min"] = inst.spec.d_min;
    sj["d_max"] = inst.spec.d_max;
    sj["community_exponent"] = inst.spec.community_exponent;
    sj["k_min"] = inst.spec.k_min;
    sj["k_max"] = inst.spec.k_max;
    sj["xi"] = inst.spec.xi;
    sj["seed"] = inst.spec.seed;
    sj["realized_xi"] = inst.realized_xi;
    sj["dropped_edges"] = inst.dropped_edges;
    std::ofstream spec_out(stem + ".spec.json");
    spec_out << sj.dump(2) << "\n";
    manifest.outputs.push_back(stem + ".edges");
    manifest.outputs.push_back(stem + ".planted.json");
    manifest.outputs.push_back(stem + ".spec.json");
  }
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out_dir + "/manifest.json");
  std::cout << "generated " << instances.size() << " instances in "
            << out_dir << "\n";
  return 0;
}

int cmd_preprocess(const std::vector<std::string>& argv,
                   const std::string& graph_path, const std::string& out) {
  Timer timer;
  Graph g = load_edge_list(graph_path);
  auto [connected, report] = connect_components(g);
  save_edge_list(connected, out);
  RunManifest manifest = base_manifest("preprocess", argv);
  manifest.input_digests[graph_path] = file_digest(graph_path);
  manifest.outputs.push_back(out);
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  std::cout << "components_before " << report.components_before
            << "\nadded_edges " << report.added_edges.size() << "\n";
  return 0;
}

int cmd_scan(const std::vector<std::string>& argv,
             const std::string& graph_path, const std::string& out,
             const ScanFlags& flags, std::uint64_t seed, int jobs) {
  Timer timer;
  Graph g = load_edge_list(graph_path);
  auto result = scan(g, flags.resolved(), seed, jobs);
  save_scan_result(result, out);
  RunManifest manifest = base_manifest("scan", argv);
  manifest.input_digests[graph_path] = file_digest(graph_path);
  manifest.outputs.push_back(out);
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  std::cout << "scales " << result.scales.size() << "\nrobust";
  for (int idx : result.robust_indices)
    std::cout << " " << format_metric(result.log10_scale(idx));
  std::cout << "\n";
  return 0;
}

int cmd_embed_train(const std::vector<std::string>& argv,
                    const std::string& corpus_dir, const std::string& out,
                    const EmbedConfig& cfg, std::uint64_t seed, int jobs) {
  Timer timer;
  auto files = list_corpus(corpus_dir);
  std::vector<WlDocument> docs(files.size());
  RunManifest manifest = base_manifest("embed-train", argv);
  for (const auto& [index, path] : files)
    manifest.input_digests[path.string()] = file_digest(path.string());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    Graph g = load_edge_list(files[i].second.string());
    auto [connected, report] = connect_components(g);
    docs[i] = wl_document(connected, cfg.wl_depth);
  });
  auto model = train_embedding(docs, cfg, seed);
  save_embedding_model(model, out);
  manifest.outputs.push_back(out);
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  std::cout << "trained on " << docs.size() << " graphs, vocab "
            << model.vocab.size() << "\n";
  return 0;
}

int cmd_label(const std::vector<std::string>& argv,
              const std::string& corpus_dir, const std::string& emb_path,
              const std::string& out, const ScanFlags& flags,
              std::uint64_t seed, int jobs) {
  Timer timer;
  auto model = load_embedding_model(emb_path);
  auto files = list_corpus(corpus_dir);
  RunManifest manifest = base_manifest("label", argv);
  manifest.input_digests[emb_path] = file_digest(emb_path);

  std::vector<BenchInstance> instances;
  for (const auto& [index, path] : files) {
    std::string planted_path =
        (path.parent_path() / ("g_" + std::to_string(index) + ".planted.json"))
            .string();
    manifest.input_digests[path.string()] = file_digest(path.string());
    manifest.input_digests[planted_path] = file_digest(planted_path);
    BenchInstance inst;
    inst.graph = load_edge_list(path.string());
    inst.planted = load_partition(planted_path);
    instances.push_back(std::move(inst));
  }

  auto result =
      build_dataset(instances, model, flags.resolved(), seed, out, jobs);
  manifest.outputs.push_back(out);
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  std::cout << "labeled " << result.rows.size() << " skipped "
            << result.skipped << "\n";
  return 0;
}

int cmd_train(const std::vector<std::string>& argv,
              const std::string& features_path, const std::string& out,
              const std::string& eval_path, const GbmConfig& cfg) {
  Timer timer;
  auto table = read_feature_csv(features_path);
  if (!table.has_targets)
    throw ParseError("training csv has no t_star_log10 column: " +
                     features_path);
  std::vector<std::vector<double>> x;
  for (const auto& row : table.rows)
    x.emplace_back(row.begin(), row.end());
  auto model = fit(x, table.targets, cfg);
  save_model(model, out);

  RunManifest manifest = base_manifest("train", argv);
  manifest.input_digests[features_path] = file_digest(features_path);
  manifest.outputs.push_back(out);

  if (!eval_path.empty()) {
    auto holdout = read_feature_csv(eval_path);
    if (!holdout.has_targets)
      throw ParseError("holdout csv has no t_star_log10 column: " +
                       eval_path);
    std::vector<std::vector<double>> hx;
    for (const auto& row : holdout.rows)
      hx.emplace_back(row.begin(), row.end());
    auto metrics = evaluate(model, hx, holdout.targets);
    manifest.input_digests[eval_path] = file_digest(eval_path);
    std::cout << "MAE " << format_metric(metrics.mae) << "\nMSE "
              << format_metric(metrics.mse) << "\n";
  }
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  return 0;
}

int cmd_detect(const std::vector<std::string>& argv,
               const std::string& graph_path, const std::string& model_path,
               const std::string& emb_path, const std::string& out,
               const ScanFlags& flags, std::uint64_t seed, int jobs) {
  Timer timer;
  Graph g = load_edge_list(graph_path);
  auto model = load_model(model_path);
  auto embedding = load_embedding_model(emb_path);
  auto result = detect(g, model, embedding, flags.resolved(), seed, jobs);

  std::ofstream result_out(out);
  if (!result_out) throw ParseError("cannot write result: " + out);
  result_out << detect_result_to_json(result).dump(2) << "\n";
  result_out.close();

  RunManifest manifest = base_manifest("detect", argv);
  manifest.input_digests[graph_path] = file_digest(graph_path);
  manifest.input_digests[model_path] = file_digest(model_path);
  manifest.input_digests[emb_path] = file_digest(emb_path);
  manifest.outputs.push_back(out);
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  std::cout << "communities " << result.partition.c << "\nchosen_scale_log10 "
            << format_metric(result.chosen_scale_log10) << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& metric, double alpha) {
  Partition pred = load_partition(pred_path);
  Partition truth = load_partition(truth_path);
  double value;
  if (metric == "ami")
    value = ami_symmetric(pred, truth);
  else if (metric == "nvi")
    value = nvi(pred, truth);
  else
    value = ecs(pred, truth, alpha);
  std::cout << format_metric(value) << "\n";
  return 0;
}

int cmd_qgen(const std::string& graph_path, const std::string& part_path,
             double t, const std::string& constructor) {
  Graph g = load_edge_list(graph_path);
  Partition p = load_partition(part_path);
  ConstructorKind kind = constructor == "linearized"
                             ? ConstructorKind::kLinearized
                             : ConstructorKind::kContinuousNormalized;
  auto q = build_quality_matrix(kind, g, t);
  std::cout << format_metric(eval_q_gen(q, p)) << "\n";
  return 0;
}

int cmd_compare(const std::string& scores_path, const std::string& control,
                double alpha) {
  auto table = load_score_table(scores_path);
  auto fr = friedman(table);
  std::cout << "friedman chi2 " << format_metric(fr.chi2) << " p "
            << format_metric(fr.p_value) << "\n";
  for (std::size_t j = 0; j < table.algorithms.size(); ++j)
    std::cout << "rank " << table.algorithms[j] << " "
              << format_metric(fr.mean_ranks[j]) << "\n";
  auto li = li_posthoc(table, control, alpha);
  for (const auto& cmp : li.comparisons)
    std::cout << "li " << cmp.algorithm << " z " << format_metric(cmp.z)
              << " p " << format_metric(cmp.p_value) << " "
              << (cmp.rejected ? "rejected" : "retained") << "\n";
  return 0;
}

int cmd_bench_runtime(const std::vector<std::string>& argv,
                      const std::string& graph_path,
                      const std::string& model_path,
                      const std::string& emb_path, const std::string& out,
                      const ScanFlags& flags, std::uint64_t seed, int jobs) {
  Timer timer;
  Graph g = load_edge_list(graph_path);
  auto model = load_model(model_path);
  auto embedding = load_embedding_model(emb_path);
  auto timings =
      measure_runtime(g, model, embedding, flags.resolved(), seed, jobs);

  std::ofstream timing_out(out);
  if (!timing_out) throw ParseError("cannot write timings: " + out);
  timing_out << timings_to_json(timings).dump(2) << "\n";
  timing_out.close();

  RunManifest manifest = base_manifest("bench-runtime", argv);
  manifest.input_digests[graph_path] = file_digest(graph_path);
  manifest.input_digests[model_path] = file_digest(model_path);
  manifest.input_digests[emb_path] = file_digest(emb_path);
  manifest.outputs.push_back(out);
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(manifest, out + ".manifest.json");
  std::cout << "total_seconds " << timings.total << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> argv_vec(argv, argv + argc);
  CLI::App app{"multi-scale community detection with learned scale selection"};
  app.set_version_flag("--version", std::string("markstab ") + kToolVersion);
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "sample benchmark corpora");
  int gen_count = 1;
  std::string gen_mode = "train", gen_out;
  std::uint64_t gen_seed = 1;
  int gen_n_lo = 0, gen_n_hi = 0, gen_jobs;
  gen->add_option("--count", gen_count, "instances")->required();
  gen->add_option("--mode", gen_mode, "parameter ranges")
      ->check(CLI::IsMember({"train", "test"}));
  gen->add_option("--master-seed", gen_seed, "corpus seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n-lo", gen_n_lo, "override min n");
  gen->add_option("--n-hi", gen_n_hi, "override max n (exclusive)");
  add_jobs_flag(gen, gen_jobs);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "connect components");
  std::string pre_graph, pre_out;
  pre->add_option("--graph", pre_graph, "edge list")->required();
  pre->add_option("--out", pre_out, "output edge list")->required();

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "multi-scale sweep");
  std::string scan_graph, scan_out;
  std::uint64_t scan_seed = 1;
  ScanFlags scan_flags;
  int scan_jobs;
  scan_cmd->add_option("--graph", scan_graph, "edge list")->required();
  scan_cmd->add_option("--out", scan_out, "scan result json")->required();
  scan_cmd->add_option("--seed", scan_seed, "ensemble seed");
  add_scan_flags(scan_cmd, scan_flags);
  add_jobs_flag(scan_cmd, scan_jobs);

  // embed-train
  auto* emb = app.add_subcommand("embed-train", "train whole-graph embedding");
  std::string emb_corpus, emb_out;
  std::uint64_t emb_seed = 1;
  EmbedConfig emb_cfg;
  int emb_jobs;
  emb->add_option("--corpus", emb_corpus, "corpus directory")->required();
  emb->add_option("--out", emb_out, "embedding model json")->required();
  emb->add_option("--dim", emb_cfg.dim, "vector size");
  emb->add_option("--epochs", emb_cfg.epochs, "training epochs");
  emb->add_option("--negative", emb_cfg.negative, "negative samples");
  emb->add_option("--lr", emb_cfg.learning_rate, "initial learning rate");
  emb->add_option("--wl-depth", emb_cfg.wl_depth, "WL iterations");
  emb->add_option("--seed", emb_seed, "init seed");
  add_jobs_flag(emb, emb_jobs);

  // label
  auto* lab = app.add_subcommand("label", "build the labeled dataset");
  std::string lab_corpus, lab_emb, lab_out;
  std::uint64_t lab_seed = 1;
  ScanFlags lab_flags;
  int lab_jobs;
  lab->add_option("--corpus", lab_corpus, "corpus directory")->required();
  lab->add_option("--embedding", lab_emb, "embedding model json")->required();
  lab->add_option("--out", lab_out, "labeled csv")->required();
  lab->add_option("--seed", lab_seed, "scan seed");
  add_scan_flags(lab, lab_flags);
  add_jobs_flag(lab, lab_jobs);

  // train
  auto* train_cmd = app.add_subcommand("train", "fit the scale predictor");
  std::string train_features, train_out, train_eval;
  GbmConfig train_cfg;
  train_cmd->add_option("--features", train_features, "labeled csv")
      ->required();
  train_cmd->add_option("--out", train_out, "model json")->required();
  train_cmd->add_option("--eval", train_eval, "holdout csv (prints MAE/MSE)");
  train_cmd->add_option("--n-trees", train_cfg.n_trees, "boosting rounds");
  train_cmd->add_option("--lr", train_cfg.learning_rate, "learning rate");
  train_cmd->add_option("--depth", train_cfg.max_depth, "max tree depth");
  train_cmd->add_option("--subsample", train_cfg.subsample,
                        "row subsample rate");
  train_cmd->add_option("--min-leaf", train_cfg.min_samples_leaf,
                        "min rows per leaf");
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--seed", train_seed, "subsampling seed");

  // detect
  auto* det = app.add_subcommand("detect", "end-to-end detection");
  std::string det_graph, det_model, det_emb, det_out;
  std::uint64_t det_seed = 1;
  ScanFlags det_flags;
  int det_jobs;
  det->add_option("--graph", det_graph, "edge list")->required();
  det->add_option("--model", det_model, "scale predictor json")->required();
  det->add_option("--embedding", det_emb, "embedding model json")->required();
  det->add_option("--out", det_out, "result json")->required();
  det->add_option("--seed", det_seed, "pipeline seed");
  add_scan_flags(det, det_flags);
  add_jobs_flag(det, det_jobs);

  // eval
  auto* ev = app.add_subcommand("eval", "compare two partitions");
  std::string ev_pred, ev_truth, ev_metric = "ami";
  double ev_alpha = 0.9;
  ev->add_option("--pred", ev_pred, "partition json")->required();
  ev->add_option("--truth", ev_truth, "partition json")->required();
  ev->add_option("--metric", ev_metric, "similarity measure")
      ->check(CLI::IsMember({"ami", "nvi", "ecs"}));
  ev->add_option("--alpha", ev_alpha, "ecs damping");

  // qgen
  auto* qg = app.add_subcommand("qgen", "evaluate the quality function");
  std::string qg_graph, qg_part, qg_ctor = "continuous";
  double qg_t = 1.0;
  qg->add_option("--graph", qg_graph, "edge list")->required();
  qg->add_option("--partition", qg_part, "partition json")->required();
  qg->add_option("--t", qg_t, "Markov scale");
  qg->add_option("--constructor", qg_ctor, "quality constructor")
      ->check(CLI::IsMember({"continuous", "linearized"}));

  // compare
  auto* cmp = app.add_subcommand("compare", "Friedman + Li post-hoc");
  std::string cmp_scores, cmp_control;
  double cmp_alpha = 0.05;
  cmp->add_option("--scores", cmp_scores, "score csv")->required();
  cmp->add_option("--control", cmp_control, "control algorithm")->required();
  cmp->add_option("--alpha", cmp_alpha, "family-wise level");

  // bench-runtime
  auto* bench = app.add_subcommand("bench-runtime", "per-step wall times");
  std::string bench_graph, bench_model, bench_emb, bench_out;
  std::uint64_t bench_seed = 1;
  ScanFlags bench_flags;
  int bench_jobs;
  bench->add_option("--graph", bench_graph, "edge list")->required();
  bench->add_option("--model", bench_model, "scale predictor json")
      ->required();
  bench->add_option("--embedding", bench_emb, "embedding model json")
      ->required();
  bench->add_option("--out", bench_out, "timings json")->required();
  bench->add_option("--seed", bench_seed, "pipeline seed");
  add_scan_flags(bench, bench_flags);
  add_jobs_flag(bench, bench_jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_generate(argv_vec, gen_count, gen_mode, gen_seed, gen_out,
                          gen_n_lo, gen_n_hi, gen_jobs);
    if (pre->parsed()) return cmd_preprocess(argv_vec, pre_graph, pre_out);
    if (scan_cmd->parsed())
      return cmd_scan(argv_vec, scan_graph, scan_out, scan_flags, scan_seed,
                      scan_jobs);
    if (emb->parsed())
      return cmd_embed_train(argv_vec, emb_corpus, emb_out, emb_cfg, emb_seed,
                             emb_jobs);
    if (lab->parsed())
      return cmd_label(argv_vec, lab_corpus, lab_emb, lab_out, lab_flags,
                       lab_seed, lab_jobs);
    if (train_cmd->parsed()) {
      train_cfg.seed = train_seed;
      return cmd_train(argv_vec, train_features, train_out, train_eval,
                       train_cfg);
    }
    if (det->parsed())
      return cmd_detect(argv_vec, det_graph, det_model, det_emb, det_out,
                        det_flags, det_seed, det_jobs);
    if (ev->parsed()) return cmd_eval(ev_pred, ev_truth, ev_metric, ev_alpha);
    if (qg->parsed()) return cmd_qgen(qg_graph, qg_part, qg_t, qg_ctor);
    if (cmp->parsed()) return cmd_compare(cmp_scores, cmp_control, cmp_alpha);
    if (bench->parsed())
      return cmd_bench_runtime(argv_vec, bench_graph, bench_model, bench_emb,
                               bench_out, bench_flags, bench_seed, bench_jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}
