#pragma once
#include <optional>
#include <utility>
#include <vector>

#include "asbf/rng.hpp"

namespace asbf {

/// Returns a direction attaining the minimum split count along the current
/// path; ties are broken uniformly at random.
int pick_balanced_direction(const std::vector<int>& counts, RngStream& rng);

/// All directions ordered by ascending split count, random order within ties.
/// Element 0 is what pick_balanced_direction would return.
std::vector<int> balanced_direction_order(const std::vector<int>& counts, RngStream& rng);

/// The d cyclic windows of length mtry over a permutation of {0..d-1}.
std::vector<std::vector<int>> cyclic_windows(const std::vector<int>& perm, int mtry);

/// One round of candidate direction sets: d windows over a fresh shuffle,
/// each direction appearing in exactly mtry of them. Sets are consumed at
/// most once per round.
struct MtrySchedule {
    std::vector<std::vector<int>> round_sets;
    std::vector<int> unused;  // indices into round_sets

    bool exhausted() const { return unused.empty(); }
};

MtrySchedule build_mtry_schedule(int d, int mtry, RngStream& rng);

/// Removes and returns a uniformly chosen unused set. Once the last set is
/// consumed the caller hands freshly built schedules to both children.
std::vector<int> advance_schedule(MtrySchedule& s, RngStream& rng);

/// Closed interval of admissible cut positions, expressed as the number of
/// I-samples on the left side.
struct FeasibleRange {
    int lo = 0;
    int hi = -1;
    bool empty() const { return hi < lo; }
};

/// Cut positions t such that both children keep at least
/// max(k, min(ceil(alpha*n), floor(n/2))) I-samples. The floor(n/2) cap keeps
/// the constraint satisfiable on odd-sized nodes when alpha is at or near 0.5.
/// Requires n >= 2k.
FeasibleRange feasible_range(const std::vector<double>& sorted_i_values,
                             double alpha, int k);

struct SplitDecision {
    int direction = -1;
    double threshold = 0.0;  // midpoint of the bracketing I order statistics
    int left_i_count = 0;
    int right_i_count = 0;
    double criterion = 0.0;  // sum of child SSEs over the J-sample
    bool j_fallback = false;  // no J-samples in the node: I-median cut used
};

/// Minimizes the two-child SSE of the J responses over feasible cuts placed
/// between distinct I order statistics. Criterion ties break toward the cut
/// nearest the I median, then toward the smaller left count. Returns nullopt
/// when no feasible cut separates distinct I values (degenerate direction).
std::optional<SplitDecision> best_split(int direction,
                                        std::vector<std::pair<double, double>> j_pairs,
                                        const std::vector<double>& sorted_i_values,
                                        const FeasibleRange& range);

}  // namespace asbf
