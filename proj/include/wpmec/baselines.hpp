#pragma once
#include <vector>

#include "wpmec/leese.hpp"
#include "wpmec/model.hpp"

// Benchmark policies. All three reuse the LEESE subproblem solvers where
// their definitions overlap, so differences in outcomes isolate the design
// choice each baseline drops.

namespace wpmec {

/// Local computing only: no offloading (power and time pinned to zero),
/// charging power, edge CPU and sensing as in LEESE.
Action lco_decide(const SystemState& state, const ChannelState& channel,
                  const SystemParams& sys, const std::vector<WdParams>& wds);

/// Equal offload time: every device gets tau = T/K; (cpu, power) solved per
/// device at that share; everything else as in LEESE.
Action eqot_decide(const SystemState& state, const ChannelState& channel,
                   const SystemParams& sys, const std::vector<WdParams>& wds);

/// Myopic edge processing: replaces the long-term HAP energy budget by a
/// hard cumulative per-slot budget, and spends it greedily on edge compute
/// and charging via a 1-D concave search. Sensing and task execution are
/// LEESE's. spent_history_j is the total HAP energy consumed in slots
/// before state.slot.
Action myopic_decide(const SystemState& state, const ChannelState& channel,
                     const SystemParams& sys, const std::vector<WdParams>& wds,
                     double spent_history_j, const BcdConfig& cfg = {});

}  // namespace wpmec
