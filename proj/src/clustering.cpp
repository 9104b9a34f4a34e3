#include "roomgroup/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "roomgroup/errors.hpp"
#include "roomgroup/rng.hpp"

namespace roomgroup {

void SpectralParams::validate() const {
  if (k == 0) fail(ErrorKind::ConfigError, "cluster count k must be at least 1");
  if (!(kmeans_tol > 0.0) || !(jacobi_tol > 0.0) || !(degree_epsilon > 0.0))
    fail(ErrorKind::ConfigError, "tolerances must be positive");
  if (kmeans_restarts == 0) fail(ErrorKind::ConfigError, "kmeans_restarts must be at least 1");
}

Matrix normalized_laplacian(const OverlapMatrix& w, double eps) {
  const std::size_t n = w.size();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += w(i, j);
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(degree, eps));
  }
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      l(i, j) = (i == j ? 1.0 : 0.0) - inv_sqrt[i] * w(i, j) * inv_sqrt[j];
  return l;
}

Matrix spectral_embed(const OverlapMatrix& w, const SpectralParams& params) {
  params.validate();
  const std::size_t n = w.size();
  const std::size_t k = params.k;
  if (n < k)
    fail(ErrorKind::DimensionMismatch, "spectral_embed needs at least k=" + std::to_string(k) +
                                           " images, got " + std::to_string(n));
  const Matrix laplacian = normalized_laplacian(w, params.degree_epsilon);
  const EigenDecomposition eig =
      jacobi_eigen(laplacian, {params.jacobi_tol, params.jacobi_max_sweeps});

  Matrix embedded(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      embedded(i, c) = eig.vectors(i, c);
      norm += embedded(i, c) * embedded(i, c);
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (std::size_t c = 0; c < k; ++c) embedded(i, c) /= norm;
    } else {
      embedded(i, 0) = 1.0;
    }
  }
  return embedded;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

std::size_t sample_weighted(const std::vector<double>& weights, double total, Rng& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

/// Greedy k-means++: each new center is the best of 2 + floor(ln k) candidates
/// drawn proportionally to squared distance.
Matrix seed_centers(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  Matrix centers(k, dim);
  std::vector<bool> chosen(n, false);

  std::size_t first = static_cast<std::size_t>(rng.below(n));
  chosen[first] = true;
  std::copy(points.row(first).begin(), points.row(first).end(), centers.row(0).begin());

  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(points.row(i), centers.row(0));

  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> candidate_closest(n);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    std::size_t best = n;
    double best_potential = std::numeric_limits<double>::infinity();
    std::vector<double> best_closest;
    if (total > 0.0) {
      for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t cand = sample_weighted(closest, total, rng);
        double potential = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          candidate_closest[i] = std::min(closest[i], squared_distance(points.row(i), points.row(cand)));
          potential += candidate_closest[i];
        }
        if (potential < best_potential) {
          best_potential = potential;
          best = cand;
          best_closest = candidate_closest;
        }
      }
    } else {
      // Every point coincides with a center already; take the first unused.
      for (std::size_t i = 0; i < n && best == n; ++i)
        if (!chosen[i]) best = i;
      if (best == n) best = 0;
      best_closest = closest;
    }
    chosen[best] = true;
    std::copy(points.row(best).begin(), points.row(best).end(), centers.row(c).begin());
    closest = std::move(best_closest);
  }
  return centers;
}

struct LloydResult {
  std::vector<int> labels;
  double inertia = 0.0;
};

std::size_t nearest(std::span<const double> point, const Matrix& centers, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = squared_distance(point, centers.row(0));
  for (std::size_t c = 1; c < centers.rows(); ++c) {
    const double d = squared_distance(point, centers.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist != nullptr) *dist = best_d;
  return best;
}

LloydResult lloyd(const Matrix& points, Matrix centers, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t k = centers.rows();
  const std::size_t dim = points.cols();
  std::vector<int> labels(n, 0);

  auto assign = [&] {
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<int>(nearest(points.row(i), centers, &dist[i]));
    // Repair empty clusters with the point farthest from its center, taken
    // only from clusters that keep at least one member.
    std::vector<std::size_t> sizes(k, 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(labels[i])] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) break;
      --sizes[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      dist[far] = 0.0;
      sizes[c] = 1;
    }
  };

  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    assign();
    Matrix updated(k, dim);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++sizes[c];
      for (std::size_t d = 0; d < dim; ++d) updated(c, d) += points(i, d);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        std::copy(centers.row(c).begin(), centers.row(c).end(), updated.row(c).begin());
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) updated(c, d) /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), centers.row(c))));
    }
    centers = std::move(updated);
    if (shift <= options.tol) break;
  }
  assign();

  LloydResult result;
  result.labels = labels;
  for (std::size_t i = 0; i < n; ++i)
    result.inertia += squared_distance(points.row(i), centers.row(static_cast<std::size_t>(labels[i])));
  return result;
}

}  // namespace

std::vector<int> kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                        const KMeansOptions& options) {
  const std::size_t n = points.rows();
  if (k == 0 || n < k)
    fail(ErrorKind::DimensionMismatch, "kmeans needs 1 <= k <= n (k=" + std::to_string(k) +
                                           ", n=" + std::to_string(n) + ")");
  if (k == 1) return std::vector<int>(n, 0);

  Rng rng(seed);
  LloydResult best;
  bool have_best = false;
  for (std::size_t run = 0; run < std::max<std::size_t>(options.restarts, 1); ++run) {
    LloydResult result = lloyd(points, seed_centers(points, k, rng), options);
    if (!have_best || result.inertia < best.inertia) {
      best = std::move(result);
      have_best = true;
    }
  }
  return best.labels;
}

Grouping spectral_cluster(const OverlapMatrix& w, const SpectralParams& params,
                          Diagnostics* diagnostics) {
  params.validate();
  const std::size_t n = w.size();
  const std::size_t k = params.k;
  if (n == 0) fail(ErrorKind::DimensionMismatch, "spectral_cluster needs at least one image");

  Grouping out;
  if (n < k) {
    for (const auto& id : w.ids()) out.groups.push_back({id});
    out.groups.resize(k);
    if (diagnostics != nullptr)
      diagnostics->warn("DegenerateInput", std::to_string(n) + " images for k=" +
                                               std::to_string(k) +
                                               " groups; returning singletons");
    return out;
  }

  std::vector<std::string> canonical = w.ids();
  std::sort(canonical.begin(), canonical.end());
  const OverlapMatrix sorted = w.permuted(canonical);

  const std::vector<int> labels =
      kmeans(spectral_embed(sorted, params), k, params.seed,
             {params.kmeans_max_iters, params.kmeans_tol, params.kmeans_restarts});

  // Relabel by first appearance in sorted-id order.
  std::vector<int> relabel(k, -1);
  int next = 0;
  for (int l : labels)
    if (relabel[static_cast<std::size_t>(l)] < 0) relabel[static_cast<std::size_t>(l)] = next++;
  for (auto& r : relabel)
    if (r < 0) r = next++;

  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < n; ++i)
    group_of[canonical[i]] = static_cast<std::size_t>(relabel[static_cast<std::size_t>(labels[i])]);

  out.groups.assign(k, {});
  for (const auto& id : w.ids()) out.groups[group_of[id]].push_back(id);
  if (diagnostics != nullptr) {
    for (std::size_t g = 0; g < k; ++g)
      if (out.groups[g].empty())
        diagnostics->warn("EmptyGroup", "group " + std::to_string(g + 1) + " received no images");
  }
  return out;
}

std::vector<double> member_mean_overlaps(const std::vector<std::string>& members,
                                         const OverlapMatrix& w) {
  std::vector<std::size_t> idx;
  idx.reserve(members.size());
  for (const auto& id : members) {
    const std::size_t i = w.index_of(id);
    if (i == w.size()) fail(ErrorKind::MissingScore, "image '" + id + "' not in overlap matrix");
    idx.push_back(i);
  }
  std::vector<double> means(members.size(), 0.0);
  if (members.size() < 2) return means;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < idx.size(); ++b)
      if (a != b) sum += w(idx[a], idx[b]);
    means[a] = sum / static_cast<double>(idx.size() - 1);
  }
  return means;
}

Grouping remove_noise(const Grouping& grouping, const OverlapMatrix& w, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorKind::ConfigError, "tau must lie in (0, 1]");
  Grouping out;
  out.unassigned = grouping.unassigned;
  for (const auto& members : grouping.groups) {
    if (members.size() < 2) {
      out.groups.push_back(members);
      continue;
    }
    const auto means = member_mean_overlaps(members, w);
    const double best = *std::max_element(means.begin(), means.end());
    const double threshold = tau * best;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (means[i] < threshold)
        out.unassigned.push_back(members[i]);
      else
        kept.push_back(members[i]);
    }
    out.groups.push_back(std::move(kept));
  }
  return out;
}

double mean_internal_score(const std::vector<std::string>& members, const OverlapMatrix& w) {
  if (members.empty()) return 0.0;
  if (members.size() == 1) return 1.0;
  const auto means = member_mean_overlaps(members, w);
  return std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
}

}  // namespace roomgroup
