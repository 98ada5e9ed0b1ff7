#pragma once

// Seeded random sheaves for property runs and the `generate` command.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qsheaf/qcore.hpp"
#include "qsheaf/random.hpp"
#include "qsheaf/sheaf.hpp"

namespace qsheaf {

enum class ChannelKind { Identity, Unitary, Depolarizing };

struct RandomSheafOptions {
  std::size_t min_vertices = 2;
  std::size_t max_vertices = 5;
  std::size_t max_stalk_dim = 2;
  std::size_t max_extra_edges = 3; ///< edges beyond a spanning tree; 0 gives a tree
  bool require_cycle = false;
};

inline QuantumChannel random_channel(ChannelKind kind, std::size_t dim, Rng &rng) {
  switch (kind) {
  case ChannelKind::Identity: return identity_channel(dim);
  case ChannelKind::Unitary: return unitary_channel(haar_unitary(dim, rng));
  case ChannelKind::Depolarizing: {
    std::uniform_real_distribution<double> p(0.05, 0.95);
    return depolarizing_channel(dim, p(rng));
  }
  }
  return identity_channel(dim);
}

/// Connected graph: a random spanning tree plus up to `max_extra_edges`
/// extra directed edges (never duplicating an existing ordered pair). All
/// stalks share one dimension so identity, unitary and depolarizing
/// channels all fit.
inline QuantumSemanticSheaf random_sheaf(Rng &rng, const RandomSheafOptions &opts = {}) {
  std::uniform_int_distribution<std::size_t> nv_dist(opts.min_vertices, opts.max_vertices);
  std::uniform_int_distribution<std::size_t> dim_dist(1, opts.max_stalk_dim);
  std::uniform_int_distribution<int> kind_dist(0, 2);
  std::bernoulli_distribution coin(0.5);

  const std::size_t n = nv_dist(rng);
  const std::size_t d = dim_dist(rng);
  SemanticGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_vertex({"v" + std::to_string(i), d});

  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    const std::size_t p = parent(rng);
    const auto e = coin(rng) ? std::make_pair(p, i) : std::make_pair(i, p);
    used.insert(e);
    pairs.push_back(e);
  }
  std::size_t extra = 0;
  if (opts.max_extra_edges > 0) {
    std::uniform_int_distribution<std::size_t> extra_dist(opts.require_cycle ? 1 : 0, opts.max_extra_edges);
    extra = extra_dist(rng);
  }
  std::uniform_int_distribution<std::size_t> vdist(0, n - 1);
  for (std::size_t k = 0, attempts = 0; k < extra && attempts < 100; ++attempts) {
    const std::size_t a = vdist(rng), b = vdist(rng);
    if (a == b || used.count({a, b}) || used.count({b, a})) continue;
    used.insert({a, b});
    pairs.emplace_back(a, b);
    ++k;
  }

  std::map<std::string, QuantumChannel> channels;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string id = "e" + std::to_string(k);
    g.add_edge({id, "v" + std::to_string(pairs[k].first), "v" + std::to_string(pairs[k].second)});
    channels.emplace(id, random_channel(static_cast<ChannelKind>(kind_dist(rng)), d, rng));
  }
  return QuantumSemanticSheaf(std::move(g), channels);
}

inline Cochain1 random_cochain1(const QuantumSemanticSheaf &sheaf, Rng &rng) {
  return Cochain1::from_vector(sheaf, random_gaussian_vector(static_cast<Eigen::Index>(sheaf.dim_c1()), rng));
}

inline Cochain0 random_cochain0(const QuantumSemanticSheaf &sheaf, Rng &rng) {
  return Cochain0::from_vector(sheaf, random_gaussian_vector(static_cast<Eigen::Index>(sheaf.dim_c0()), rng));
}

} // namespace qsheaf
