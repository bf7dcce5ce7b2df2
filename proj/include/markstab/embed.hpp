#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "markstab/errors.hpp"
#include "markstab/graph.hpp"
#include "markstab/rng.hpp"

namespace markstab {

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline double sigmoid(double x) {
  if (x > 40.0) return 1.0;
  if (x < -40.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace detail

// Bag of WL subtree labels: one word per node per refinement round, rounds
// 0..h. Words are sorted, so isomorphic graphs produce equal documents.
struct WlDocument {
  std::vector<std::uint64_t> words;

  bool operator==(const WlDocument& other) const = default;
};

inline WlDocument wl_document(const Graph& g, int h = 2) {
  if (h < 0) throw DimensionError("wl_document needs h >= 0");
  const int n = g.n();
  std::vector<std::uint64_t> label(n);
  for (int v = 0; v < n; ++v)
    label[v] = detail::fnv1a64("d" + std::to_string(g.degree(v)));

  WlDocument doc;
  doc.words.reserve(static_cast<std::size_t>(n) * (h + 1));
  doc.words.insert(doc.words.end(), label.begin(), label.end());

  std::vector<std::uint64_t> next(n);
  for (int round = 1; round <= h; ++round) {
    for (int v = 0; v < n; ++v) {
      std::vector<std::uint64_t> nbr;
      nbr.reserve(g.neighbors(v).size());
      for (int u : g.neighbors(v)) nbr.push_back(label[u]);
      std::sort(nbr.begin(), nbr.end());
      std::string key = std::to_string(label[v]);
      for (std::uint64_t w : nbr) {
        key += ',';
        key += std::to_string(w);
      }
      next[v] = detail::fnv1a64(key);
    }
    label = next;
    doc.words.insert(doc.words.end(), label.begin(), label.end());
  }
  std::sort(doc.words.begin(), doc.words.end());
  return doc;
}

struct EmbedConfig {
  int dim = 256;
  int epochs = 30;
  int negative = 5;
  double learning_rate = 0.025;
  int wl_depth = 2;

  void validate() const {
    if (dim < 1) throw DimensionError("embedding dim must be >= 1");
    if (epochs < 1) throw DimensionError("embedding epochs must be >= 1");
    if (negative < 1) throw DimensionError("negative samples must be >= 1");
    if (!(learning_rate > 0.0))
      throw DimensionError("learning rate must be > 0");
  }
};

// PV-DBOW model over WL vocabularies: each corpus graph owns a vector that
// is trained to predict the graph's own words against negative samples.
struct EmbeddingModel {
  EmbedConfig config;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> vocab;        // sorted word hashes
  std::vector<std::int64_t> vocab_counts;  // corpus frequency per word
  std::vector<std::vector<double>> word_vectors;
  std::vector<std::vector<double>> graph_vectors;  // one per corpus graph
  std::vector<double> epoch_losses;
  bool trained = false;

  int vocab_index(std::uint64_t word) const {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), word);
    if (it == vocab.end() || *it != word) return -1;
    return static_cast<int>(it - vocab.begin());
  }
};

namespace detail {

// Cumulative table over count^0.75, the standard negative-sampling
// distribution.
struct NegTable {
  std::vector<double> cdf;

  explicit NegTable(const std::vector<std::int64_t>& counts) {
    cdf.resize(counts.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      acc += std::pow(static_cast<double>(counts[i]), 0.75);
      cdf[i] = acc;
    }
  }

  int draw(Rng& rng) const {
    double u = rng.next_unit() * cdf.back();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) return static_cast<int>(cdf.size()) - 1;
    return static_cast<int>(it - cdf.begin());
  }
};

// One PV-DBOW step for (doc vector, positive word): logistic updates
// against the positive and `negative` sampled words. When freeze_words is
// set only the doc vector moves (inference mode). Returns the step's
// negative log-likelihood.
inline double dbow_step(std::vector<double>& doc_vec,
                        std::vector<std::vector<double>>& word_vectors,
                        int pos_index, const NegTable& table, Rng& rng,
                        int negative, double lr, bool freeze_words) {
  const int dim = static_cast<int>(doc_vec.size());
  std::vector<double> grad(dim, 0.0);
  double loss = 0.0;
  for (int k = 0; k <= negative; ++k) {
    int target;
    double label;
    if (k == 0) {
      target = pos_index;
      label = 1.0;
    } else {
      target = table.draw(rng);
      if (target == pos_index) continue;
      label = 0.0;
    }
    auto& w = word_vectors[target];
    double dot = 0.0;
    for (int d = 0; d < dim; ++d) dot += doc_vec[d] * w[d];
    double f = sigmoid(dot);
    double g = (label - f) * lr;
    loss -= std::log(std::max(label > 0.5 ? f : 1.0 - f, 1e-12));
    for (int d = 0; d < dim; ++d) grad[d] += g * w[d];
    if (!freeze_words)
      for (int d = 0; d < dim; ++d) w[d] += g * doc_vec[d];
  }
  for (int d = 0; d < dim; ++d) doc_vec[d] += grad[d];
  return loss;
}

inline std::vector<double> seeded_doc_vector(int dim, Rng& rng) {
  std::vector<double> v(dim);
  for (int d = 0; d < dim; ++d)
    v[d] = (rng.next_unit() - 0.5) / dim;
  return v;
}

}  // namespace detail

inline EmbeddingModel train_embedding(const std::vector<WlDocument>& corpus,
                                      const EmbedConfig& cfg,
                                      std::uint64_t seed) {
  cfg.validate();
  if (corpus.empty())
    throw DimensionError("embedding corpus must be nonempty");

  EmbeddingModel model;
  model.config = cfg;
  model.seed = seed;

  std::map<std::uint64_t, std::int64_t> counts;
  for (const auto& doc : corpus)
    for (std::uint64_t w : doc.words) ++counts[w];
  for (auto& [word, count] : counts) {
    model.vocab.push_back(word);
    model.vocab_counts.push_back(count);
  }

  const int dim = cfg.dim;
  model.word_vectors.assign(model.vocab.size(),
                            std::vector<double>(dim, 0.0));
  Rng rng(mix_seed(seed, 0));
  model.graph_vectors.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    model.graph_vectors.push_back(detail::seeded_doc_vector(dim, rng));

  detail::NegTable table(model.vocab_counts);
  long long total_words = 0;
  for (const auto& doc : corpus)
    total_words += static_cast<long long>(doc.words.size());
  const double total_steps =
      static_cast<double>(total_words) * cfg.epochs;

  long long processed = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
      for (std::uint64_t word : corpus[gi].words) {
        double lr = cfg.learning_rate *
                    std::max(1e-4, 1.0 - processed / (total_steps + 1.0));
        int pos = model.vocab_index(word);
        epoch_loss += detail::dbow_step(model.graph_vectors[gi],
                                        model.word_vectors, pos, table, rng,
                                        cfg.negative, lr, false);
        ++processed;
      }
    }
    model.epoch_losses.push_back(epoch_loss /
                                 static_cast<double>(total_words));
  }
  model.trained = true;
  return model;
}

// Embeds a graph unseen at training time: fresh seeded doc vector trained
// against the frozen word vectors. Words outside the training vocabulary
// are skipped entirely, so a zero-overlap document returns its seeded
// initialization.
inline std::vector<double> infer_embedding(const EmbeddingModel& model,
                                           const WlDocument& doc,
                                           std::uint64_t seed) {
  if (!model.trained)
    throw ModelError("infer_embedding requires a trained model");
  Rng rng(mix_seed(seed, 1));
  std::vector<double> vec =
      detail::seeded_doc_vector(model.config.dim, rng);

  std::vector<int> known;
  known.reserve(doc.words.size());
  for (std::uint64_t w : doc.words) {
    int idx = model.vocab_index(w);
    if (idx >= 0) known.push_back(idx);
  }
  if (known.empty()) return vec;

  detail::NegTable table(model.vocab_counts);
  auto frozen = model.word_vectors;  // dbow_step wants mutable; not written
  const double total_steps =
      static_cast<double>(known.size()) * model.config.epochs;
  long long processed = 0;
  for (int epoch = 0; epoch < model.config.epochs; ++epoch) {
    for (int pos : known) {
      double lr = model.config.learning_rate *
                  std::max(1e-4, 1.0 - processed / (total_steps + 1.0));
      detail::dbow_step(vec, frozen, pos, table, rng, model.config.negative,
                        lr, true);
      ++processed;
    }
  }
  return vec;
}

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionError("cosine on vectors of unequal length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

struct FeatureVector {
  double emb_max = 0, emb_min = 0, emb_mean = 0, emb_median = 0, emb_std = 0;
  double n_nodes = 0, n_edges = 0;
  double global_efficiency = 0, avg_degree = 0, avg_clustering = 0,
         assortativity = 0;

  static constexpr int kCount = 11;

  std::array<double, kCount> values() const {
    return {emb_max,      emb_min,    emb_mean,         emb_median,
            emb_std,      n_nodes,    n_edges,          global_efficiency,
            avg_degree,   avg_clustering, assortativity};
  }

  static const std::array<const char*, kCount>& names() {
    static const std::array<const char*, kCount> kNames = {
        "emb_max",       "emb_min",    "emb_mean",
        "emb_median",    "emb_std",    "n_nodes",
        "n_edges",       "global_efficiency", "avg_degree",
        "avg_clustering", "assortativity"};
    return kNames;
  }
};

inline FeatureVector featurize(const Graph& g,
                               const std::vector<double>& emb) {
  if (emb.empty()) throw DimensionError("featurize needs a nonempty embedding");
  for (double x : emb)
    if (!std::isfinite(x))
      throw DimensionError("featurize needs a finite embedding");

  FeatureVector fv;
  std::vector<double> sorted = emb;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  fv.emb_min = sorted.front();
  fv.emb_max = sorted.back();
  double sum = 0.0;
  for (double x : sorted) sum += x;
  fv.emb_mean = sum / n;
  fv.emb_median = n % 2 == 1
                      ? sorted[n / 2]
                      : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  double ss = 0.0;
  for (double x : sorted) ss += (x - fv.emb_mean) * (x - fv.emb_mean);
  fv.emb_std = std::sqrt(ss / n);  // population convention

  fv.n_nodes = g.n();
  fv.n_edges = g.m();
  fv.global_efficiency = global_efficiency(g);
  fv.avg_degree = degree_stats(g).avg_degree;
  fv.avg_clustering = avg_clustering(g);
  try {
    fv.assortativity = degree_assortativity(g);
  } catch (const DegenerateVarianceError&) {
    fv.assortativity = 0.0;  // regular graphs have no degree variance
  }
  return fv;
}

// ---- feature CSV ----

inline std::string feature_csv_header(bool with_target) {
  std::string h;
  for (int i = 0; i < FeatureVector::kCount; ++i) {
    if (i) h += ',';
    h += FeatureVector::names()[i];
  }
  if (with_target) h += ",t_star_log10";
  return h;
}

inline void write_feature_csv(
    const std::string& path, const std::vector<FeatureVector>& rows,
    const std::vector<double>* targets = nullptr) {
  if (targets && targets->size() != rows.size())
    throw DimensionError("feature/target row count mismatch");
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write feature csv: " + path);
  out << feature_csv_header(targets != nullptr) << "\n";
  out.precision(17);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto vals = rows[r].values();
    for (int i = 0; i < FeatureVector::kCount; ++i) {
      if (i) out << ',';
      out << vals[i];
    }
    if (targets) out << ',' << (*targets)[r];
    out << "\n";
  }
}

struct FeatureTable {
  std::vector<std::array<double, FeatureVector::kCount>> rows;
  std::vector<double> targets;  // empty when the csv has no target column
  bool has_targets = false;
};

inline FeatureTable read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open feature csv: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("feature csv is empty: " + path);
  FeatureTable table;
  if (line == feature_csv_header(true)) {
    table.has_targets = true;
  } else if (line != feature_csv_header(false)) {
    throw ParseError("unexpected feature csv header in " + path);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("feature csv line " + std::to_string(lineno) +
                         ": bad number '" + cell + "'");
      }
    }
    std::size_t expect = FeatureVector::kCount + (table.has_targets ? 1 : 0);
    if (vals.size() != expect)
      throw ParseError("feature csv line " + std::to_string(lineno) +
                       ": expected " + std::to_string(expect) + " columns");
    std::array<double, FeatureVector::kCount> row{};
    std::copy_n(vals.begin(), FeatureVector::kCount, row.begin());
    table.rows.push_back(row);
    if (table.has_targets) table.targets.push_back(vals.back());
  }
  return table;
}

// ---- model persistence ----

inline constexpr int kEmbeddingFormatVersion = 1;

inline void save_embedding_model(const EmbeddingModel& model,
                                 const std::string& path) {
  nlohmann::json j;
  j["version"] = kEmbeddingFormatVersion;
  j["dim"] = model.config.dim;
  j["epochs"] = model.config.epochs;
  j["negative"] = model.config.negative;
  j["learning_rate"] = model.config.learning_rate;
  j["wl_depth"] = model.config.wl_depth;
  j["seed"] = model.seed;
  j["vocab"] = model.vocab;
  j["vocab_counts"] = model.vocab_counts;
  j["word_vectors"] = model.word_vectors;
  j["graph_vectors"] = model.graph_vectors;
  j["epoch_losses"] = model.epoch_losses;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write embedding model: " + path);
  out << j.dump() << "\n";
}

inline EmbeddingModel load_embedding_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding model: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad embedding model JSON in " + path + ": " + e.what());
  }
  int version = j.value("version", -1);
  if (version != kEmbeddingFormatVersion)
    throw VersionError("embedding model format " + std::to_string(version) +
                       " unsupported; this build reads " +
                       std::to_string(kEmbeddingFormatVersion));
  EmbeddingModel model;
  try {
    model.config.dim = j.at("dim").get<int>();
    model.config.epochs = j.at("epochs").get<int>();
    model.config.negative = j.at("negative").get<int>();
    model.config.learning_rate = j.at("learning_rate").get<double>();
    model.config.wl_depth = j.at("wl_depth").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.vocab = j.at("vocab").get<std::vector<std::uint64_t>>();
    model.vocab_counts = j.at("vocab_counts").get<std::vector<std::int64_t>>();
    model.word_vectors =
        j.at("word_vectors").get<std::vector<std::vector<double>>>();
    model.graph_vectors =
        j.at("graph_vectors").get<std::vector<std::vector<double>>>();
    model.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad embedding model JSON in " + path + ": " + e.what());
  }
  model.trained = true;
  return model;
}

}  // namespace markstab
