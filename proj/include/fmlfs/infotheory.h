#ifndef FMLFS_INFOTHEORY_H_
#define FMLFS_INFOTHEORY_H_

#include <cstdint>
#include <span>
#include <vector>

namespace fmlfs {

// Non-owning view of a discrete variable observed N times. Every code must be
// < cardinality.
class DiscreteColumn {
 public:
  DiscreteColumn(std::span<const std::uint32_t> codes, std::uint32_t cardinality);

  std::span<const std::uint32_t> codes() const { return codes_; }
  std::uint32_t cardinality() const { return cardinality_; }
  std::size_t size() const { return codes_.size(); }

 private:
  std::span<const std::uint32_t> codes_;
  std::uint32_t cardinality_;
};

// Plug-in estimators in bits. Probabilities are empirical frequencies over the
// observed values and 0 log 0 is taken as 0.
double Entropy(const DiscreteColumn& col);
double JointEntropy(const DiscreteColumn& a, const DiscreteColumn& b);
// H(a | b).
double ConditionalEntropy(const DiscreteColumn& a, const DiscreteColumn& b);
// H(a) + H(b) - H(a, b), clamped at 0.
double MutualInformation(const DiscreteColumn& a, const DiscreteColumn& b);
// H(a, b) - I(a; b).
double CorrelationDistance(const DiscreteColumn& a, const DiscreteColumn& b);

}  // namespace fmlfs

#endif  // FMLFS_INFOTHEORY_H_
