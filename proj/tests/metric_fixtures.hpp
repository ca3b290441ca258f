#pragma once

// Hand-computed ranking-metric fixtures shared by the unit tests and the
// acceptance gate. Expected values are written out as the arithmetic of the
// metric definitions (precision-at-relevant-positions mean; binary-gain DCG
// with 1/log2(i+1) discounts), independent of the library implementation.

#include <cmath>
#include <vector>

namespace fixtures {

struct MetricFixture {
    std::vector<int> rels;
    double ap;
    double ndcg;  // NaN marks "undefined" (zero relevant items)
};

inline std::vector<MetricFixture> ranking_metric_fixtures() {
    const double nan = std::nan("");
    const double d2 = 1.0;                  // 1/log2(2)
    const double d3 = 1.0 / std::log2(3.0);
    const double d4 = 0.5;                  // 1/log2(4)
    const double d5 = 1.0 / std::log2(5.0);
    const double d6 = 1.0 / std::log2(6.0);
    return {
        {{1}, 1.0, 1.0},
        {{0}, 0.0, nan},
        {{1, 1, 1}, 1.0, 1.0},
        {{0, 1}, 1.0 / 2.0, d3 / d2},
        {{1, 0, 1}, (1.0 + 2.0 / 3.0) / 2.0, (d2 + d4) / (d2 + d3)},
        {{0, 0, 1}, 1.0 / 3.0, d4 / d2},
        {{1, 0}, 1.0, 1.0},
        {{0, 1, 0, 1}, (1.0 / 2.0 + 2.0 / 4.0) / 2.0, (d3 + d5) / (d2 + d3)},
        {{1, 1, 0, 0}, 1.0, 1.0},
        {{0, 0, 1, 1}, (1.0 / 3.0 + 2.0 / 4.0) / 2.0, (d4 + d5) / (d2 + d3)},
        {{1, 0, 0, 1}, (1.0 + 2.0 / 4.0) / 2.0, (d2 + d5) / (d2 + d3)},
        {{0, 1, 1}, (1.0 / 2.0 + 2.0 / 3.0) / 2.0, (d3 + d4) / (d2 + d3)},
        {{1, 1, 1, 0, 0}, 1.0, 1.0},
        {{0, 0, 0, 0, 1}, 1.0 / 5.0, d6 / d2},
        {{1, 0, 1, 0, 1},
         (1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0,
         (d2 + d4 + d6) / (d2 + d3 + d4)},
        {{0, 1, 0, 0, 1, 0}, (1.0 / 2.0 + 2.0 / 5.0) / 2.0, (d3 + d6) / (d2 + d3)},
        {{0, 0, 0}, 0.0, nan},
        {{1, 1, 0, 1}, (1.0 + 1.0 + 3.0 / 4.0) / 3.0, (d2 + d3 + d5) / (d2 + d3 + d4)},
        {{0, 1, 0}, 1.0 / 2.0, d3 / d2},
        {{0, 0, 0, 1}, 1.0 / 4.0, d5 / d2},
        {{1, 0, 0, 0}, 1.0, 1.0},
        {{0, 1, 1, 1},
         (1.0 / 2.0 + 2.0 / 3.0 + 3.0 / 4.0) / 3.0,
         (d3 + d4 + d5) / (d2 + d3 + d4)},
    };
}

}  // namespace fixtures
