#pragma once

// Brute-force reference implementations shared by unit and acceptance tests.

#include <scenegraph/cluster.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace scenegraph::oracle {

/// Number of distinct directed Hamiltonian cycles on `nodes` (sorted) in
/// `edges`, counting a cycle and its reversal once. Enumerates every
/// permutation that starts at the smallest node.
inline int cycle_support(const std::vector<PlaneId>& nodes, const std::set<std::pair<PlaneId, PlaneId>>& edges) {
  if (nodes.size() < 2) return 0;
  std::vector<PlaneId> rest(nodes.begin() + 1, nodes.end());
  std::set<std::vector<PlaneId>> classes;
  do {
    std::vector<PlaneId> cyc{nodes.front()};
    cyc.insert(cyc.end(), rest.begin(), rest.end());
    bool closed = true;
    for (std::size_t i = 0; i < cyc.size() && closed; ++i) {
      closed = edges.count({cyc[i], cyc[(i + 1) % cyc.size()]}) > 0;
    }
    if (!closed) continue;
    std::vector<PlaneId> rev{cyc.front()};
    rev.insert(rev.end(), cyc.rbegin(), cyc.rend() - 1);
    classes.insert(std::min(cyc, rev));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return static_cast<int>(classes.size());
}

/// Enumerates every node subset of each size (in the given order), scores it
/// by cycle support, and packs disjoint sets greedily by (support desc,
/// lexicographic IDs), removing accepted nodes before the next size.
inline std::vector<RoomCluster> cluster_rooms(std::vector<PlaneId> nodes,
                                              std::set<std::pair<PlaneId, PlaneId>> edges,
                                              const std::vector<int>& sizes) {
  std::sort(nodes.begin(), nodes.end());
  std::vector<RoomCluster> accepted;
  for (int l : sizes) {
    const std::size_t n = nodes.size();
    std::vector<std::pair<int, std::vector<PlaneId>>> scored;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) != l) continue;
      std::vector<PlaneId> subset;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) subset.push_back(nodes[i]);
      const int s = cycle_support(subset, edges);
      if (s > 0) scored.emplace_back(s, subset);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::set<PlaneId> used;
    for (const auto& [s, subset] : scored) {
      if (std::any_of(subset.begin(), subset.end(), [&](PlaneId p) { return used.count(p) > 0; })) continue;
      used.insert(subset.begin(), subset.end());
      accepted.push_back({subset});
    }
    std::erase_if(nodes, [&](PlaneId p) { return used.count(p) > 0; });
    std::erase_if(edges, [&](const auto& e) { return used.count(e.first) || used.count(e.second); });
  }
  return accepted;
}

}  // namespace scenegraph::oracle
