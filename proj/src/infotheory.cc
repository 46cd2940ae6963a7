#include "fmlfs/infotheory.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fmlfs/error.h"

namespace fmlfs {
namespace {

// -sum p log2 p over the non-zero cells of a count table.
double EntropyOfCounts(std::span<const std::size_t> counts, std::size_t n) {
  const double total = static_cast<double>(n);
  double h = 0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<std::size_t> Histogram(const DiscreteColumn& col) {
  std::vector<std::size_t> counts(col.cardinality(), 0);
  for (std::uint32_t v : col.codes()) ++counts[v];
  return counts;
}

std::vector<std::size_t> JointHistogram(const DiscreteColumn& a,
                                        const DiscreteColumn& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("columns differ in length (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  const std::size_t width = b.cardinality();
  std::vector<std::size_t> counts(a.cardinality() * width, 0);
  const auto ac = a.codes();
  const auto bc = b.codes();
  for (std::size_t i = 0; i < ac.size(); ++i) ++counts[ac[i] * width + bc[i]];
  return counts;
}

// Absorbs round-off so that quantities which are non-negative in exact
// arithmetic never come out as -1e-16.
double ClampNonNegative(double v) { return v < 0 ? 0.0 : v; }

}  // namespace

DiscreteColumn::DiscreteColumn(std::span<const std::uint32_t> codes,
                               std::uint32_t cardinality)
    : codes_(codes), cardinality_(cardinality) {
  if (codes.empty()) throw InvalidArgument("discrete column is empty");
  if (cardinality == 0) throw InvalidArgument("cardinality must be positive");
  for (std::uint32_t v : codes) {
    if (v >= cardinality) {
      throw InvalidArgument("code " + std::to_string(v) +
                            " exceeds column cardinality " +
                            std::to_string(cardinality));
    }
  }
}

double Entropy(const DiscreteColumn& col) {
  return EntropyOfCounts(Histogram(col), col.size());
}

double JointEntropy(const DiscreteColumn& a, const DiscreteColumn& b) {
  return EntropyOfCounts(JointHistogram(a, b), a.size());
}

double ConditionalEntropy(const DiscreteColumn& a, const DiscreteColumn& b) {
  const std::vector<std::size_t> joint = JointHistogram(a, b);
  const std::vector<std::size_t> given = Histogram(b);
  const double total = static_cast<double>(a.size());
  const std::size_t width = b.cardinality();
  double h = 0;
  for (std::size_t i = 0; i < a.cardinality(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t c = joint[i * width + j];
      if (c == 0) continue;
      const double p_joint = static_cast<double>(c) / total;
      const double p_cond = static_cast<double>(c) / static_cast<double>(given[j]);
      h -= p_joint * std::log2(p_cond);
    }
  }
  return ClampNonNegative(h);
}

double MutualInformation(const DiscreteColumn& a, const DiscreteColumn& b) {
  const double joint = JointEntropy(a, b);
  return ClampNonNegative(Entropy(a) + Entropy(b) - joint);
}

double CorrelationDistance(const DiscreteColumn& a, const DiscreteColumn& b) {
  const double joint = JointEntropy(a, b);
  const double mi = ClampNonNegative(Entropy(a) + Entropy(b) - joint);
  return ClampNonNegative(joint - mi);
}

}  // namespace fmlfs
