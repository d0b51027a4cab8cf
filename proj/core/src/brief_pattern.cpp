#include "coverscan/orb.hpp"

namespace coverscan {

// 256 test-point pairs (ax, ay, bx, by) drawn once from an isotropic Gaussian
// with sigma = 31 / 5, rounded to integers, rejecting any coordinate outside
// [-15, 15] and coincident pairs. Generator: numpy default_rng(20190731).
const std::array<BriefPair, kBriefBits>& brief_pattern() {
  static constexpr std::array<BriefPair, kBriefBits> kPattern{{
    {-11, -3, 0, -4}, {-5, 4, 1, -4}, {3, 8, 1, 5}, {4, 5, -4, 8},
    {-2, 0, 14, 7}, {-7, 2, 3, -4}, {11, 6, 3, 6}, {4, -2, -1, 8},
    {8, -10, -6, -12}, {3, -2, 0, -11}, {-2, 5, -2, -2}, {-3, -3, 2, -5},
    {8, 4, 6, 0}, {-6, -1, -4, 6}, {-2, 5, -1, 5}, {6, -6, 5, 1},
    {-2, 7, 0, 0}, {-1, 13, 12, 2}, {-2, -13, -5, -15}, {2, 11, 9, -2},
    {2, 5, 4, 2}, {-10, -9, 4, 0}, {1, 1, -2, 0}, {2, -1, 2, 2},
    {5, -10, 1, 6}, {14, -2, 2, -4}, {-2, 1, -5, 5}, {4, -5, 2, -3},
    {8, -8, 5, -4}, {-9, 2, 11, -2}, {4, 0, -7, 5}, {-1, 3, 14, -7},
    {-6, 11, 1, 5}, {2, -3, 10, -5}, {-13, 0, -3, -3}, {-6, -3, -9, 7},
    {-2, -2, 4, -4}, {5, 5, 8, 9}, {-1, -12, -6, -3}, {7, 5, 9, 4},
    {11, -5, 7, 0}, {1, 1, 0, 7}, {-7, -2, 2, -4}, {-2, -11, 9, 4},
    {2, 3, 9, 13}, {12, 2, -1, 14}, {-5, 12, 5, -4}, {-3, 6, -1, 3},
    {-1, 1, 5, -7}, {2, 7, -2, 9}, {-9, -1, -3, -14}, {3, 2, -3, 2},
    {4, 11, -1, 9}, {9, -3, 9, -9}, {-1, -1, -6, 5}, {7, -10, -12, 8},
    {-4, -15, -9, -4}, {2, -5, 8, 2}, {1, 5, -5, -3}, {6, -2, 3, -1},
    {4, -6, 6, -13}, {-3, -10, -8, -6}, {10, -6, 12, -8}, {-1, 0, 3, -1},
    {3, 7, 0, 0}, {-14, 3, 13, 4}, {-3, -10, 4, 6}, {2, -4, 1, -4},
    {5, -2, -3, -2}, {0, 8, -6, -4}, {-1, 0, -4, 5}, {-9, 11, -4, -7},
    {-2, 2, 4, 0}, {-2, -5, 3, 5}, {-5, -5, 3, -11}, {8, 11, 4, 5},
    {-4, 8, 0, 6}, {0, 1, -12, -10}, {-14, 4, 11, 1}, {11, -11, 3, -6},
    {-2, -2, 9, -4}, {8, -4, -7, -7}, {4, -5, -4, 7}, {13, -7, 10, -7},
    {6, 9, -4, 6}, {-3, -2, -11, -9}, {-7, 4, 1, 2}, {-1, 2, 1, 2},
    {-6, 6, -2, -2}, {2, 1, 4, -1}, {6, -5, 3, -7}, {12, 3, -7, 7},
    {-5, -1, 5, 5}, {-6, -4, -4, 3}, {-12, -3, 0, 8}, {14, -2, 4, 8},
    {-5, -1, 3, 1}, {2, 9, -9, -9}, {5, -5, 11, 14}, {3, -7, 11, 0},
    {7, -2, -2, -4}, {-7, 0, 5, -6}, {-5, 6, 4, 3}, {7, -3, -7, -1},
    {-1, 9, -3, 5}, {2, -5, -8, -1}, {-1, -4, -4, -3}, {11, 5, 3, -3},
    {3, -7, -9, 1}, {-5, -3, -6, 0}, {0, 2, -6, 0}, {1, 0, 5, 1},
    {-6, 12, 8, -2}, {7, 0, 9, 1}, {-2, 4, 12, -7}, {-3, -5, 2, -1},
    {-11, 1, 10, 1}, {2, -6, 8, 4}, {-7, -3, 2, 6}, {-1, 1, -4, 1},
    {12, 0, 2, -2}, {3, -4, 2, 5}, {8, -6, 3, 0}, {-3, -3, -7, 4},
    {5, -6, 0, -1}, {7, 2, -4, 11}, {-12, -7, 4, 1}, {0, 3, -5, 7},
    {-2, 6, 5, -15}, {2, 8, 6, -4}, {-8, 5, 1, 0}, {-2, -11, 1, 3},
    {6, 8, 1, 11}, {5, 1, 1, 2}, {-2, 2, -5, -4}, {-7, 3, -7, -4},
    {6, 6, -6, -11}, {-6, -2, 3, 3}, {-3, -7, 0, 3}, {-2, -2, 2, -2},
    {6, 6, 4, -6}, {8, -6, -1, -5}, {4, 12, 8, 3}, {4, -1, 2, -5},
    {6, 6, -7, -10}, {0, 7, -3, 5}, {11, 1, 7, 10}, {1, -4, 0, -3},
    {-2, 14, 0, 2}, {10, -2, -7, 12}, {3, -9, 6, -7}, {7, 5, -1, 5},
    {-1, 14, 3, 9}, {0, 4, 1, -4}, {0, 3, 1, 2}, {10, -5, 0, 4},
    {-1, -3, 5, -12}, {-12, 0, -5, 0}, {-1, 0, -9, -1}, {6, -1, 3, -6},
    {3, 1, -1, 3}, {4, -6, -2, -2}, {-3, 4, -1, -10}, {-8, -1, 2, -11},
    {8, 1, 1, -3}, {-2, -1, 4, 7}, {0, -9, -14, 6}, {-1, -4, -4, -4},
    {-2, -3, -8, 0}, {13, 2, 3, 2}, {1, -2, -4, -1}, {-2, -10, -11, 7},
    {11, -2, 6, -3}, {2, 0, -2, -3}, {3, 5, 0, -3}, {-1, 6, -6, 7},
    {4, -7, 7, 2}, {-6, 7, 4, 5}, {9, -6, 8, 0}, {4, 4, -14, 1},
    {2, 3, 4, 1}, {5, 3, -7, 3}, {11, 6, 3, -5}, {2, 1, -2, -2},
    {-6, 0, 4, 7}, {4, 5, 4, 7}, {-12, -11, -9, 3}, {-11, 5, -3, -5},
    {-10, -6, -4, 9}, {9, 9, 3, 0}, {1, 0, -7, -7}, {7, 0, 6, -1},
    {-8, 0, -6, 5}, {-2, 2, 4, 6}, {-2, -13, 2, -8}, {4, 5, 9, -8},
    {2, 0, -6, -4}, {9, 0, 2, -3}, {-4, -9, -7, -5}, {5, 1, 0, -3},
    {1, 12, -8, -1}, {-1, 3, -14, -1}, {3, -6, 5, -4}, {5, -8, 6, -12},
    {-12, 4, 0, 6}, {4, 3, -3, 4}, {1, -2, 4, -7}, {-1, -5, 10, 0},
    {3, -10, 7, -3}, {11, -3, -5, 3}, {5, 10, -4, -5}, {10, 7, 7, 1},
    {5, 6, -1, -11}, {-7, 2, -2, 1}, {-1, 2, -1, 11}, {-1, -4, -6, 2},
    {-5, 1, 3, -3}, {4, 2, 12, 1}, {4, -6, 5, 6}, {4, -3, -6, -6},
    {3, 10, -8, 2}, {4, 2, -8, 5}, {-4, -9, 7, 4}, {3, -1, 15, 5},
    {-10, -12, 2, 3}, {-1, 1, 3, 5}, {-7, -1, -6, -1}, {2, 5, 4, -5},
    {7, -7, 2, -9}, {5, 2, 9, 0}, {-2, -3, -9, -3}, {7, -3, 6, -4},
    {-5, 3, -6, -1}, {9, -2, -2, -2}, {-1, 2, 2, 0}, {9, -2, 3, -3},
    {-6, 3, 2, -7}, {-8, 0, 5, -11}, {2, 14, -6, -1}, {-5, 9, 3, 2},
    {-9, -3, 8, -15}, {-6, 9, 1, -3}, {4, 1, 10, -3}, {2, -13, -7, -9},
    {2, 4, 6, 0}, {-2, -4, 2, -4}, {-5, 5, 7, -9}, {-14, 15, 5, -3},
    {-2, 2, -5, 4}, {13, 2, 4, 11}, {6, 8, -11, -6}, {-4, -1, -5, -3},
    {-9, -2, 1, 2}, {10, 5, -2, -3}, {-7, 3, -3, -2}, {5, -6, 3, 12},
  }};
  return kPattern;
}

}  // namespace coverscan
