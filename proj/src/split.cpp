#include "asbf/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "asbf/errors.hpp"

namespace asbf {

std::vector<int> balanced_direction_order(const std::vector<int>& counts, RngStream& rng) {
    std::vector<int> order(counts.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return counts[a] < counts[b]; });
    return order;
}

int pick_balanced_direction(const std::vector<int>& counts, RngStream& rng) {
    return balanced_direction_order(counts, rng).front();
}

std::vector<std::vector<int>> cyclic_windows(const std::vector<int>& perm, int mtry) {
    const int d = static_cast<int>(perm.size());
    std::vector<std::vector<int>> sets(d);
    for (int s = 0; s < d; ++s) {
        sets[s].reserve(mtry);
        for (int t = 0; t < mtry; ++t) sets[s].push_back(perm[(s + t) % d]);
    }
    return sets;
}

MtrySchedule build_mtry_schedule(int d, int mtry, RngStream& rng) {
    if (mtry < 1 || mtry > d) throw ConfigError("mtry outside {1..d}");
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    MtrySchedule s;
    s.round_sets = cyclic_windows(perm, mtry);
    s.unused.resize(d);
    std::iota(s.unused.begin(), s.unused.end(), 0);
    return s;
}

std::vector<int> advance_schedule(MtrySchedule& s, RngStream& rng) {
    if (s.unused.empty()) throw Error("advance_schedule on exhausted schedule");
    const int pos = rng.next_int(static_cast<int>(s.unused.size()));
    const int which = s.unused[pos];
    s.unused.erase(s.unused.begin() + pos);
    return s.round_sets[which];
}

FeasibleRange feasible_range(const std::vector<double>& sorted_i_values,
                             double alpha, int k) {
    const int n = static_cast<int>(sorted_i_values.size());
    if (n < 2 * k) {
        std::ostringstream msg;
        msg << "feasible_range precondition violated: node I-count " << n
            << " below 2k = " << 2 * k;
        throw ConfigError(msg.str());
    }
    const int m_alpha = static_cast<int>(std::ceil(alpha * n - 1e-12));
    const int m = std::max(k, std::min(m_alpha, n / 2));
    return FeasibleRange{m, n - m};
}

std::optional<SplitDecision> best_split(int direction,
                                        std::vector<std::pair<double, double>> j_pairs,
                                        const std::vector<double>& sorted_i_values,
                                        const FeasibleRange& range) {
    const int n = static_cast<int>(sorted_i_values.size());
    if (range.empty()) return std::nullopt;

    // Candidate cuts sit between distinct consecutive I order statistics, so
    // no training point ever lies on a threshold.
    std::vector<int> cuts;
    for (int t = std::max(range.lo, 1); t <= std::min(range.hi, n - 1); ++t) {
        if (sorted_i_values[t - 1] < sorted_i_values[t]) cuts.push_back(t);
    }
    if (cuts.empty()) return std::nullopt;

    auto median_distance = [n](int t) { return std::abs(2 * t - n); };

    if (j_pairs.empty()) {
        int best = cuts.front();
        for (int t : cuts) {
            if (median_distance(t) < median_distance(best)) best = t;
        }
        SplitDecision dec;
        dec.direction = direction;
        dec.threshold = 0.5 * (sorted_i_values[best - 1] + sorted_i_values[best]);
        dec.left_i_count = best;
        dec.right_i_count = n - best;
        dec.criterion = 0.0;
        dec.j_fallback = true;
        return dec;
    }

    std::sort(j_pairs.begin(), j_pairs.end());
    const int nj = static_cast<int>(j_pairs.size());

    // Center responses at the node mean: leaves the child-SSE criterion
    // unchanged while keeping flat-response ties exact.
    double mean = 0.0;
    for (const auto& [c, r] : j_pairs) mean += r;
    mean /= nj;

    std::vector<double> sum1(nj + 1, 0.0), sum2(nj + 1, 0.0);
    for (int i = 0; i < nj; ++i) {
        const double r = j_pairs[i].second - mean;
        sum1[i + 1] = sum1[i] + r;
        sum2[i + 1] = sum2[i] + r * r;
    }
    auto sse = [&](int a, int b) {
        const int cnt = b - a;
        if (cnt <= 0) return 0.0;
        const double s1 = sum1[b] - sum1[a];
        const double s2 = sum2[b] - sum2[a];
        return s2 - s1 * s1 / cnt;
    };

    // Cuts are scanned in ascending t, so on full ties the smallest left
    // count wins, completing the documented (criterion, median distance, t)
    // tie-break order.
    int best_t = -1;
    double best_crit = 0.0;
    int j_left = 0;  // count of J coordinates <= current threshold
    for (int t : cuts) {
        const double thr = 0.5 * (sorted_i_values[t - 1] + sorted_i_values[t]);
        while (j_left < nj && j_pairs[j_left].first <= thr) ++j_left;
        const double crit = sse(0, j_left) + sse(j_left, nj);
        if (best_t < 0 || crit < best_crit ||
            (crit == best_crit && median_distance(t) < median_distance(best_t))) {
            best_t = t;
            best_crit = crit;
        }
    }

    SplitDecision dec;
    dec.direction = direction;
    dec.threshold = 0.5 * (sorted_i_values[best_t - 1] + sorted_i_values[best_t]);
    dec.left_i_count = best_t;
    dec.right_i_count = n - best_t;
    dec.criterion = best_crit;
    dec.j_fallback = false;
    return dec;
}

}  // namespace asbf
