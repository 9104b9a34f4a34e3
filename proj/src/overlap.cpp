#include "roomgroup/overlap.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "roomgroup/catalog.hpp"
#include "roomgroup/errors.hpp"

namespace roomgroup {

using nlohmann::json;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t HeadWeights::input_dim() const {
  if (layers.empty() || layers.front().weight.empty()) return 0;
  return layers.front().weight.front().size();
}

void HeadWeights::validate() const {
  if (layers.empty()) fail(ErrorKind::DimensionMismatch, "head weights: no layers");
  std::size_t in = input_dim();
  if (in == 0) fail(ErrorKind::DimensionMismatch, "head weights: first layer has no inputs");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string where = "head weights layer " + std::to_string(l);
    if (layer.weight.empty()) fail(ErrorKind::DimensionMismatch, where + ": no outputs");
    for (const auto& row : layer.weight) {
      if (row.size() != in)
        fail(ErrorKind::DimensionMismatch, where + ": expected " + std::to_string(in) +
                                               " inputs, row has " + std::to_string(row.size()));
      for (double v : row)
        if (!std::isfinite(v)) fail(ErrorKind::DimensionMismatch, where + ": non-finite weight");
    }
    if (layer.bias.size() != layer.weight.size())
      fail(ErrorKind::DimensionMismatch, where + ": bias length does not match output count");
    in = layer.weight.size();
  }
  if (in != 1) fail(ErrorKind::DimensionMismatch, "head weights: final layer must have one output");
  if (layers.back().activation != Activation::Sigmoid)
    fail(ErrorKind::DimensionMismatch, "head weights: final activation must be sigmoid");
}

double head_score(const Embedding& a, const Embedding& b, const HeadWeights& weights) {
  if (a.vector.size() != b.vector.size())
    fail(ErrorKind::DimensionMismatch, "embeddings '" + a.image_id + "' and '" + b.image_id +
                                           "' differ in dimension");
  if (a.vector.size() != weights.input_dim())
    fail(ErrorKind::DimensionMismatch,
         "embedding dimension " + std::to_string(a.vector.size()) +
             " does not match head input " + std::to_string(weights.input_dim()));

  std::vector<double> x(a.vector.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<double>(a.vector[i]) * static_cast<double>(b.vector[i]);

  for (const auto& layer : weights.layers) {
    std::vector<double> y(layer.weight.size());
    for (std::size_t o = 0; o < y.size(); ++o) {
      double acc = layer.bias[o];
      const auto& row = layer.weight[o];
      for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * x[i];
      switch (layer.activation) {
        case Activation::Identity: break;
        case Activation::Relu: acc = std::max(acc, 0.0); break;
        case Activation::Sigmoid: acc = sigmoid(acc); break;
      }
      y[o] = acc;
    }
    x = std::move(y);
  }
  return x.front();
}

namespace {

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  fail(ErrorKind::SchemaViolation, "unknown activation '" + name + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

}  // namespace

HeadWeights parse_head_weights(std::string_view text) {
  HeadWeights weights;
  try {
    const json doc = json::parse(text);
    for (const auto& layer : doc.at("layers")) {
      DenseLayer dense;
      dense.weight = layer.at("weight").get<std::vector<std::vector<double>>>();
      dense.bias = layer.at("bias").get<std::vector<double>>();
      dense.activation = parse_activation(layer.at("activation").get<std::string>());
      weights.layers.push_back(std::move(dense));
    }
  } catch (const json::parse_error& e) {
    fail(ErrorKind::MalformedDocument, std::string("head weights: ") + e.what());
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaViolation, std::string("head weights: ") + e.what());
  }
  weights.validate();
  return weights;
}

HeadWeights load_head_weights(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_head_weights(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_head_weights(const HeadWeights& weights) {
  json layers = json::array();
  for (const auto& layer : weights.layers) {
    layers.push_back({{"weight", layer.weight},
                      {"bias", layer.bias},
                      {"activation", activation_name(layer.activation)}});
  }
  return json{{"layers", layers}}.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

OverlapMatrix::OverlapMatrix(std::vector<std::string> ids, Matrix scores)
    : ids_(std::move(ids)), scores_(std::move(scores)) {
  const std::size_t n = ids_.size();
  if (scores_.rows() != n || scores_.cols() != n)
    fail(ErrorKind::DimensionMismatch, "overlap matrix shape does not match id count");
  for (std::size_t i = 0; i < n; ++i) {
    scores_(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = scores_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        fail(ErrorKind::OutOfRangeScore,
             "score for (" + ids_[i] + "," + ids_[j] + ") outside [0,1]");
      if (scores_(j, i) != v)
        fail(ErrorKind::OutOfRangeScore, "asymmetric score for (" + ids_[i] + "," + ids_[j] + ")");
    }
  }
}

std::size_t OverlapMatrix::index_of(std::string_view id) const {
  return static_cast<std::size_t>(std::find(ids_.begin(), ids_.end(), id) - ids_.begin());
}

double OverlapMatrix::score(std::string_view a, std::string_view b) const {
  const std::size_t i = index_of(a);
  const std::size_t j = index_of(b);
  if (i == size() || j == size())
    fail(ErrorKind::MissingScore, "no score for (" + std::string(a) + "," + std::string(b) + ")");
  return scores_(i, j);
}

OverlapMatrix OverlapMatrix::permuted(const std::vector<std::string>& ids) const {
  if (ids.size() != size()) fail(ErrorKind::DimensionMismatch, "permutation has wrong length");
  std::vector<std::size_t> src(ids.size());
  std::vector<bool> used(ids.size(), false);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    src[i] = index_of(ids[i]);
    if (src[i] == size() || used[src[i]])
      fail(ErrorKind::DimensionMismatch, "not a permutation of the matrix ids");
    used[src[i]] = true;
  }
  Matrix m(ids.size(), ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j) m(i, j) = scores_(src[i], src[j]);
  return OverlapMatrix(ids, std::move(m));
}

// ---------------------------------------------------------------------------

Embedding ScorerBackend::embed(const ImageRef& image) {
  fail(ErrorKind::BackendFailure, "backend has no encoder (image '" + image.image_id + "')");
}

double ScorerBackend::head(const Embedding& a, const Embedding& b) {
  fail(ErrorKind::BackendFailure,
       "backend has no head (pair " + a.image_id + "," + b.image_id + ")");
}

double ScorerBackend::pair_score(const ImageRef& a, const ImageRef& b) {
  fail(ErrorKind::BackendFailure,
       "backend cannot score pairs directly (" + a.image_id + "," + b.image_id + ")");
}

std::shared_ptr<const Embedding> EmbeddingCache::get(const ImageRef& image,
                                                     const Encoder& encoder) {
  std::promise<std::shared_ptr<const Embedding>> promise;
  std::shared_future<std::shared_ptr<const Embedding>> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(image.image_id);
    if (it == entries_.end()) {
      future = promise.get_future().share();
      entries_.emplace(image.image_id, future);
      ++computed_;
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(std::make_shared<const Embedding>(encoder(image)));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return future.get();
}

std::size_t EmbeddingCache::computed() const {
  std::lock_guard lock(mutex_);
  return computed_;
}

namespace {

/// Runs fn(i) for i in [0, count) on `threads` workers. Exceptions are
/// collected per index and the lowest-index one is rethrown, so the reported
/// failure does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || stop.load()) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
          stop.store(true);
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(threads, count);
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_score(double v, const std::string& a, const std::string& b) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << "backend returned " << v << " for pair (" << a << "," << b << "), outside [0,1]";
    fail(ErrorKind::OutOfRangeScore, msg.str());
  }
}

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

OverlapBuild build_overlap_matrix(std::span<const ImageRef> images, ScorerBackend& backend,
                                  const BuildOptions& options) {
  const std::size_t n = images.size();
  if (n == 0) fail(ErrorKind::DimensionMismatch, "cannot build an overlap matrix for zero images");
  std::vector<std::string> ids;
  ids.reserve(n);
  std::set<std::string> seen;
  for (const auto& image : images) {
    if (!seen.insert(image.image_id).second)
      fail(ErrorKind::SchemaViolation, "duplicate image id '" + image.image_id + "'");
    ids.push_back(image.image_id);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(pair_count(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<double> values(pairs.size(), 0.0);
  CallAccounting calls;
  const std::size_t threads = std::max<std::size_t>(options.threads, 1);

  if (backend.has_encoder()) {
    EmbeddingCache cache;
    auto encode = [&](const ImageRef& image) {
      try {
        return backend.embed(image);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::BackendFailure) throw;
        fail(ErrorKind::BackendFailure, "encoder failed on '" + image.image_id + "': " + describe(e));
      } catch (const std::exception& e) {
        fail(ErrorKind::BackendFailure, "encoder failed on '" + image.image_id + "': " + describe(e));
      }
    };
    // Encoder pass: one forward pass per image.
    parallel_for(n, threads, [&](std::size_t i) { cache.get(images[i], encode); });
    std::atomic<std::size_t> head_calls{0};
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
      const auto [i, j] = pairs[p];
      const auto a = cache.get(images[i], encode);
      const auto b = cache.get(images[j], encode);
      double v = 0.0;
      try {
        v = backend.head(*a, *b);
      } catch (const std::exception& e) {
        fail(ErrorKind::BackendFailure,
             "head failed on pair (" + ids[i] + "," + ids[j] + "): " + describe(e));
      }
      head_calls.fetch_add(1);
      check_score(v, ids[i], ids[j]);
      values[p] = v;
    });
    calls.encoder_calls = cache.computed();
    calls.head_calls = head_calls.load();
  } else {
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
      const auto [i, j] = pairs[p];
      double v = 0.0;
      try {
        v = backend.pair_score(images[i], images[j]);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::MissingScore || e.kind() == ErrorKind::BackendFailure) throw;
        fail(ErrorKind::BackendFailure,
             "scoring failed on pair (" + ids[i] + "," + ids[j] + "): " + describe(e));
      } catch (const std::exception& e) {
        fail(ErrorKind::BackendFailure,
             "scoring failed on pair (" + ids[i] + "," + ids[j] + "): " + describe(e));
      }
      check_score(v, ids[i], ids[j]);
      values[p] = v;
    });
  }

  Matrix m(n, n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    m(i, j) = m(j, i) = values[p];
  }
  return {OverlapMatrix(std::move(ids), std::move(m)), calls};
}

OverlapBuild build_overlap_matrix(const std::vector<std::string>& image_ids,
                                  ScorerBackend& backend, const BuildOptions& options) {
  std::vector<ImageRef> refs;
  refs.reserve(image_ids.size());
  for (const auto& id : image_ids) refs.push_back({id, ""});
  return build_overlap_matrix(std::span<const ImageRef>(refs), backend, options);
}

// ---------------------------------------------------------------------------

std::pair<std::string, std::string> pair_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  return {std::string(a), std::string(b)};
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  for (auto& f : fields) f = canonical_text(f);
  return fields;
}

}  // namespace

PairScores parse_pair_scores(std::string_view text) {
  PairScores scores;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (canonical_text(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 3 && fields[0] == "image_a" && fields[1] == "image_b" &&
          fields[2] == "score")
        continue;
      fail(ErrorKind::MalformedRow, where + ": expected header 'image_a,image_b,score'");
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      fail(ErrorKind::MalformedRow, where + ": expected 3 fields");
    double value = 0.0;
    std::size_t used = 0;
    try {
      value = std::stod(fields[2], &used);
    } catch (const std::exception&) {
      fail(ErrorKind::MalformedRow, where + ": score '" + fields[2] + "' is not a number");
    }
    if (used != fields[2].size())
      fail(ErrorKind::MalformedRow, where + ": score '" + fields[2] + "' is not a number");
    if (!(value >= 0.0 && value <= 1.0))
      fail(ErrorKind::OutOfRangeScore,
           where + ": score " + fields[2] + " for (" + fields[0] + "," + fields[1] +
               ") outside [0,1]");
    if (fields[0] == fields[1]) continue;  // self pairs are implied
    auto key = pair_key(fields[0], fields[1]);
    auto [it, inserted] = scores.emplace(key, value);
    if (!inserted && it->second != value)
      fail(ErrorKind::MalformedRow,
           where + ": conflicting duplicate score for (" + key.first + "," + key.second + ")");
    if (end == text.size()) break;
  }
  if (!header_seen) fail(ErrorKind::MalformedRow, "pair score file is empty (missing header)");
  return scores;
}

PairScores load_pair_scores(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_pair_scores(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_pair_scores(const PairScores& scores) {
  std::string out = "image_a,image_b,score\n";
  char buf[64];
  for (const auto& [key, value] : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += key.first;
    out += ',';
    out += key.second;
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

void write_pair_scores(const PairScores& scores, const std::filesystem::path& path) {
  write_text_file(path, serialize_pair_scores(scores));
}

void add_pair_scores(PairScores& scores, const OverlapMatrix& matrix) {
  const auto& ids = matrix.ids();
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) scores[pair_key(ids[i], ids[j])] = matrix(i, j);
}

double PrecomputedScores::pair_score(const ImageRef& a, const ImageRef& b) {
  auto key = pair_key(a.image_id, b.image_id);
  auto it = scores_.find(key);
  if (it == scores_.end())
    fail(ErrorKind::MissingScore, "no score for pair (" + key.first + "," + key.second + ")");
  return it->second;
}

OverlapMatrix matrix_from_pair_scores(const PairScores& scores,
                                      const std::vector<std::string>& image_ids) {
  PrecomputedScores backend(scores);
  return build_overlap_matrix(image_ids, backend).matrix;
}

OverlapMatrix load_precomputed_scores(const std::filesystem::path& path,
                                      const std::vector<std::string>& image_ids) {
  return matrix_from_pair_scores(load_pair_scores(path), image_ids);
}

LinearHead::LinearHead(std::vector<Embedding> embeddings, HeadWeights weights)
    : weights_(std::move(weights)) {
  weights_.validate();
  for (auto& e : embeddings) {
    if (e.vector.size() != weights_.input_dim())
      fail(ErrorKind::DimensionMismatch,
           "embedding '" + e.image_id + "' has dimension " + std::to_string(e.vector.size()) +
               ", head expects " + std::to_string(weights_.input_dim()));
    std::string id = e.image_id;
    table_.emplace(std::move(id), std::move(e));
  }
}

Embedding LinearHead::embed(const ImageRef& image) {
  auto it = table_.find(image.image_id);
  if (it == table_.end())
    fail(ErrorKind::BackendFailure, "no embedding for image '" + image.image_id + "'");
  return it->second;
}

double LinearHead::head(const Embedding& a, const Embedding& b) {
  return head_score(a, b, weights_);
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'R', 'G', 'E', 'C'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      fail(ErrorKind::IoFailure, std::string("embedding cache truncated while reading ") + what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16(const char* what) {
    auto b = take(2, what);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[0]) |
                                      (static_cast<unsigned char>(b[1]) << 8));
  }
  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_embedding_cache(std::span<const Embedding> embeddings) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().vector.size();
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim)
      fail(ErrorKind::DimensionMismatch, "embedding '" + e.image_id + "' has dimension " +
                                             std::to_string(e.vector.size()) + ", expected " +
                                             std::to_string(dim));
    if (e.image_id.size() > 0xFFFF)
      fail(ErrorKind::IoFailure, "image id too long for the embedding cache format");
  }
  if (!embeddings.empty() && dim == 0)
    fail(ErrorKind::DimensionMismatch, "embeddings must have dimension >= 1");

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kEmbeddingCacheVersion);
  put_u32(out, static_cast<std::uint32_t>(dim));
  put_u32(out, static_cast<std::uint32_t>(embeddings.size()));
  for (const auto& e : embeddings) {
    put_u16(out, static_cast<std::uint16_t>(e.image_id.size()));
    out += e.image_id;
    for (float f : e.vector) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<Embedding> parse_embedding_cache(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    fail(ErrorKind::MagicMismatch, "not an embedding cache (bad magic)");
  Reader in(bytes.substr(sizeof(kMagic)));
  const std::uint32_t version = in.u32("version");
  if (version != kEmbeddingCacheVersion)
    fail(ErrorKind::MagicMismatch, "unsupported embedding cache version " + std::to_string(version));
  const std::uint32_t dim = in.u32("dimension");
  const std::uint32_t count = in.u32("count");
  if (count > 0 && dim == 0)
    fail(ErrorKind::DimensionMismatch, "embedding cache declares dimension 0");
  std::vector<Embedding> out;
  out.reserve(std::min<std::uint32_t>(count, 1u << 20));
  for (std::uint32_t r = 0; r < count; ++r) {
    Embedding e;
    const std::uint16_t len = in.u16("id length");
    e.image_id = std::string(in.take(len, "image id"));
    e.vector.resize(dim);
    for (std::uint32_t d = 0; d < dim; ++d) e.vector[d] = std::bit_cast<float>(in.u32("vector"));
    out.push_back(std::move(e));
  }
  if (!in.done()) fail(ErrorKind::IoFailure, "embedding cache has trailing bytes");
  return out;
}

void write_embedding_cache(std::span<const Embedding> embeddings,
                           const std::filesystem::path& path) {
  write_text_file(path, serialize_embedding_cache(embeddings));
}

std::vector<Embedding> read_embedding_cache(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  try {
    return parse_embedding_cache(bytes);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace roomgroup
