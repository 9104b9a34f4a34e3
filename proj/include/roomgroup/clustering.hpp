#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roomgroup/diagnostics.hpp"
#include "roomgroup/linalg.hpp"
#include "roomgroup/overlap.hpp"

namespace roomgroup {

struct SpectralParams {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::size_t kmeans_max_iters = 100;
  double kmeans_tol = 1e-9;
  std::size_t kmeans_restarts = 10;
  double jacobi_tol = 1e-10;
  std::size_t jacobi_max_sweeps = 100;
  double degree_epsilon = 1e-12;

  /// Throws Error{ConfigError} when k == 0 or a tolerance is not positive.
  void validate() const;
};

struct Grouping {
  std::vector<std::vector<std::string>> groups;
  std::vector<std::string> unassigned;

  bool operator==(const Grouping&) const = default;
};

/// L = I - D^-1/2 W D^-1/2, with each degree floored at `eps`.
Matrix normalized_laplacian(const OverlapMatrix& w, double eps = 1e-12);

/// Eigenvectors of L for the k smallest eigenvalues, one row per image,
/// rows scaled to unit length (all-zero rows become e_1).
Matrix spectral_embed(const OverlapMatrix& w, const SpectralParams& params);

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-9;
  std::size_t restarts = 10;
};

/// Lloyd's algorithm from greedy k-means++ seeding; the lowest-inertia run
/// out of `restarts` wins. Labels are in [0, k). Requires rows >= k >= 1.
std::vector<int> kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                        const KMeansOptions& options = {});

/// Spectral embedding followed by k-means. Rows are processed in sorted-id
/// order, so the result depends only on the set of ids and their scores, not
/// on the order of `w`. Groups are ordered by their smallest id; members keep
/// the order of `w`. When n < k, returns n singletons plus k - n empty groups
/// and records a DegenerateInput warning.
Grouping spectral_cluster(const OverlapMatrix& w, const SpectralParams& params,
                          Diagnostics* diagnostics = nullptr);

/// Mean overlap of each member with the rest of its group.
std::vector<double> member_mean_overlaps(const std::vector<std::string>& members,
                                         const OverlapMatrix& w);

/// Moves members whose mean overlap is below tau times the group's best mean
/// to `unassigned`. Groups with fewer than two members are left alone.
Grouping remove_noise(const Grouping& grouping, const OverlapMatrix& w, double tau);

/// Mean pairwise score inside a group: 1 for singletons, 0 for empty groups.
double mean_internal_score(const std::vector<std::string>& members, const OverlapMatrix& w);

}  // namespace roomgroup
