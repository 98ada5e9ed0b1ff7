#pragma once

// Small sheaves shared by the test suites.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qsheaf/qcore.hpp"
#include "qsheaf/sheaf.hpp"

namespace testing_support {

using namespace qsheaf;

/// Directed graph with one channel per edge, all stalks of dimension `dim`.
inline QuantumSemanticSheaf uniform_sheaf(const std::vector<std::string> &vertices,
                                          const std::vector<std::pair<std::string, std::string>> &edges,
                                          std::size_t dim, const std::vector<QuantumChannel> &channels) {
  SemanticGraph g;
  for (const auto &v : vertices) g.add_vertex({v, dim});
  std::map<std::string, QuantumChannel> ch;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string id = edges[i].first + edges[i].second;
    g.add_edge({id, edges[i].first, edges[i].second});
    ch.emplace(id, channels[i]);
  }
  return QuantumSemanticSheaf(std::move(g), ch);
}

/// A→B→C→A with identity channels on scalar stalks.
inline QuantumSemanticSheaf triangle() {
  return uniform_sheaf({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "A"}}, 1,
                       std::vector<QuantumChannel>(3, identity_channel(1)));
}

inline TwoCellComplex triangle_cell() { return {{{"ABC", {{"AB", 1}, {"BC", 1}, {"CA", 1}}}}}; }

inline QuantumSemanticSheaf single_edge(std::size_t dim, const QuantumChannel &ch) {
  return uniform_sheaf({"u", "v"}, {{"u", "v"}}, dim, {ch});
}

inline QuantumSemanticSheaf path3() {
  return uniform_sheaf({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, 1,
                       std::vector<QuantumChannel>(2, identity_channel(1)));
}

/// Two vertices joined by three parallel identity paths: dim H¹ = 2.
inline QuantumSemanticSheaf theta() {
  return uniform_sheaf({"u", "w", "m1", "m2"}, {{"u", "w"}, {"u", "m1"}, {"m1", "w"}, {"u", "m2"}, {"m2", "w"}}, 1,
                       std::vector<QuantumChannel>(5, identity_channel(1)));
}

/// Square v0→v1→v2→v3→v0 on qubits, Pauli-X on the first edge.
inline QuantumSemanticSheaf pauli_square() {
  return uniform_sheaf({"v0", "v1", "v2", "v3"}, {{"v0", "v1"}, {"v1", "v2"}, {"v2", "v3"}, {"v3", "v0"}}, 2,
                       {unitary_channel(gates::pauli_x()), identity_channel(2), identity_channel(2), identity_channel(2)});
}

inline TwoCellComplex square_cell() {
  return {{{"sq", {{"v0v1", 1}, {"v1v2", 1}, {"v2v3", 1}, {"v3v0", 1}}}}};
}

inline Cochain1 scalar_cochain1(std::initializer_list<double> xs) {
  Cochain1 c;
  for (double x : xs) c.blocks.push_back(ComplexMatrix::Constant(1, 1, x));
  return c;
}

inline Cochain0 scalar_cochain0(std::initializer_list<double> xs) {
  Cochain0 c;
  for (double x : xs) c.blocks.push_back(ComplexMatrix::Constant(1, 1, x));
  return c;
}

} // namespace testing_support
