#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "roomgroup/linalg.hpp"

namespace roomgroup {

struct Embedding {
  std::string image_id;
  std::vector<float> vector;

  bool operator==(const Embedding&) const = default;
};

enum class Activation { Identity, Relu, Sigmoid };

struct DenseLayer {
  std::vector<std::vector<double>> weight;  // out x in
  std::vector<double> bias;                 // out
  Activation activation = Activation::Identity;

  bool operator==(const DenseLayer&) const = default;
};

struct HeadWeights {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const;
  /// Throws Error{DimensionMismatch} unless layers chain, the last layer has
  /// one output, and the last activation is sigmoid.
  void validate() const;

  bool operator==(const HeadWeights&) const = default;
};

double sigmoid(double x);

/// Runs the dense layers over the element-wise product of the two vectors.
/// Arithmetic is in double; the product commutes, so the score is symmetric.
double head_score(const Embedding& a, const Embedding& b, const HeadWeights& weights);

HeadWeights parse_head_weights(std::string_view text);
HeadWeights load_head_weights(const std::filesystem::path& path);
std::string serialize_head_weights(const HeadWeights& weights);

/// Symmetric n x n overlap probabilities with unit diagonal.
class OverlapMatrix {
 public:
  OverlapMatrix() = default;
  /// Takes ownership of `scores`; throws Error{DimensionMismatch} on shape
  /// mismatch and Error{OutOfRangeScore} on an entry outside [0,1] or an
  /// asymmetric pair. The diagonal is forced to 1.
  OverlapMatrix(std::vector<std::string> ids, Matrix scores);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& scores() const { return scores_; }
  double operator()(std::size_t i, std::size_t j) const { return scores_(i, j); }

  /// Index of `id`, or size() when absent.
  std::size_t index_of(std::string_view id) const;
  double score(std::string_view a, std::string_view b) const;

  /// Reorders rows/columns to follow `ids`, which must be a permutation.
  OverlapMatrix permuted(const std::vector<std::string>& ids) const;

  bool operator==(const OverlapMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  Matrix scores_;
};

struct ImageRef {
  std::string image_id;
  std::string uri;
};

/// Scoring backend. Encoder/head backends override `embed` and `head` and
/// report has_encoder() == true; direct backends override `pair_score`.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual bool has_encoder() const = 0;
  virtual Embedding embed(const ImageRef& image);
  virtual double head(const Embedding& a, const Embedding& b);
  virtual double pair_score(const ImageRef& a, const ImageRef& b);
};

struct CallAccounting {
  std::size_t encoder_calls = 0;
  std::size_t head_calls = 0;

  bool operator==(const CallAccounting&) const = default;
};

/// Encoder invocations a per-pair Siamese evaluation would need without the
/// embedding cache: two forward passes per unordered pair.
constexpr std::size_t naive_encoder_calls(std::size_t n) { return n < 2 ? 0 : n * (n - 1); }
constexpr std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Per-image embedding cache with exactly-once computation. Concurrent
/// requests for the same id wait on the first request's result.
class EmbeddingCache {
 public:
  using Encoder = std::function<Embedding(const ImageRef&)>;

  std::shared_ptr<const Embedding> get(const ImageRef& image, const Encoder& encoder);
  std::size_t computed() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_future<std::shared_ptr<const Embedding>>> entries_;
  std::size_t computed_ = 0;
};

struct BuildOptions {
  std::size_t threads = 1;  // pair-scoring workers; 0 or 1 = inline
};

struct OverlapBuild {
  OverlapMatrix matrix;
  CallAccounting calls;
};

/// Scores every unordered pair once. Results do not depend on `threads`.
/// Errors: BackendFailure (names the image or pair), MissingScore, and
/// OutOfRangeScore when a backend returns a value outside [0,1].
OverlapBuild build_overlap_matrix(std::span<const ImageRef> images, ScorerBackend& backend,
                                  const BuildOptions& options = {});
OverlapBuild build_overlap_matrix(const std::vector<std::string>& image_ids,
                                  ScorerBackend& backend, const BuildOptions& options = {});

// ---------------------------------------------------------------------------
// Backends

/// Unordered pair key, lexicographically smaller id first.
std::pair<std::string, std::string> pair_key(std::string_view a, std::string_view b);

using PairScores = std::map<std::pair<std::string, std::string>, double>;

/// Reads a `image_a,image_b,score` CSV. Errors: IoFailure, MalformedRow,
/// OutOfRangeScore.
PairScores load_pair_scores(const std::filesystem::path& path);
PairScores parse_pair_scores(std::string_view text);
/// Rows are emitted with 17 significant digits so values round-trip exactly.
std::string serialize_pair_scores(const PairScores& scores);
void write_pair_scores(const PairScores& scores, const std::filesystem::path& path);
void add_pair_scores(PairScores& scores, const OverlapMatrix& matrix);

class PrecomputedScores final : public ScorerBackend {
 public:
  explicit PrecomputedScores(PairScores scores) : scores_(std::move(scores)) {}

  bool has_encoder() const override { return false; }
  double pair_score(const ImageRef& a, const ImageRef& b) override;

 private:
  PairScores scores_;
};

/// Matrix from a pair score file restricted to `image_ids`; MissingScore names
/// the first uncovered pair.
OverlapMatrix load_precomputed_scores(const std::filesystem::path& path,
                                      const std::vector<std::string>& image_ids);
OverlapMatrix matrix_from_pair_scores(const PairScores& scores,
                                      const std::vector<std::string>& image_ids);

/// Encoder = lookup in a precomputed embedding table; head = dense layers.
class LinearHead final : public ScorerBackend {
 public:
  LinearHead(std::vector<Embedding> embeddings, HeadWeights weights);

  bool has_encoder() const override { return true; }
  Embedding embed(const ImageRef& image) override;
  double head(const Embedding& a, const Embedding& b) override;

 private:
  std::unordered_map<std::string, Embedding> table_;
  HeadWeights weights_;
};

// ---------------------------------------------------------------------------
// Embedding cache file: "RGEC", u32 version, u32 dim, u32 count, then per
// record u16 id length, id bytes, dim x f32. Little-endian throughout.

inline constexpr std::uint32_t kEmbeddingCacheVersion = 1;

std::string serialize_embedding_cache(std::span<const Embedding> embeddings);
std::vector<Embedding> parse_embedding_cache(std::string_view bytes);
void write_embedding_cache(std::span<const Embedding> embeddings,
                           const std::filesystem::path& path);
std::vector<Embedding> read_embedding_cache(const std::filesystem::path& path);

}  // namespace roomgroup
