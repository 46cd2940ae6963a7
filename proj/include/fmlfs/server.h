#ifndef FMLFS_SERVER_H_
#define FMLFS_SERVER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fmlfs/client.h"
#include "fmlfs/matrix.h"
#include "fmlfs/pareto.h"
#include "json.hpp"

namespace fmlfs {

struct AggregatedStats {
  Matrix<double> mi_global;  // D x L
  Matrix<double> cd_global;  // D x D
  std::uint32_t num_clients = 0;
};

enum class Weighting {
  kUnweighted,   // plain mean over clients
  kByInstances,  // mean weighted by each client's row count
};

// Element-wise mean of the client matrices. Reports are summed in ascending
// client_id order regardless of the order given.
AggregatedStats Aggregate(std::span<const ClientReport> reports,
                          Weighting weighting = Weighting::kUnweighted);

// o1 = row max of the global MI, o2 = row max of the global CD.
std::vector<ObjectivePair> Objectives(const AggregatedStats& stats);

nlohmann::json ToJson(const AggregatedStats& stats);

}  // namespace fmlfs

#endif  // FMLFS_SERVER_H_
