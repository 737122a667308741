#pragma once

#include <array>
#include <string_view>

#include "evplan/grid/network.hpp"

namespace evplan::grid {

// Load categories used by the bundled 33-bus case.
inline constexpr std::array<std::string_view, 10> kLoadCategories = {
    "commercial", "municipal", "industrial", "hospital",    "park",
    "food_service", "residential", "education", "integrated", "agriculture"};

inline bool is_known_category(std::string_view c) {
  for (auto k : kLoadCategories)
    if (k == c) return true;
  return false;
}

namespace ieee33 {

struct Row {
  int from, to;
  double r_ohm, x_ohm;
  double p_kw, q_kvar;  // load at `to`, three-phase total
  std::string_view category;
};

// Baran & Wu 33-bus feeder, 12.66 kV, 3715 kW / 2300 kvar.
inline constexpr std::array<Row, 32> kRows = {{
    {1, 2, 0.0922, 0.0470, 100, 60, "residential"},
    {2, 3, 0.4930, 0.2511, 90, 40, "industrial"},
    {3, 4, 0.3660, 0.1864, 120, 80, "hospital"},
    {4, 5, 0.3811, 0.1941, 60, 30, "industrial"},
    {5, 6, 0.8190, 0.7070, 60, 20, "industrial"},
    {6, 7, 0.1872, 0.6188, 200, 100, "commercial"},
    {7, 8, 0.7114, 0.2351, 200, 100, "industrial"},
    {8, 9, 1.0300, 0.7400, 60, 20, "commercial"},
    {9, 10, 1.0440, 0.7400, 60, 20, "food_service"},
    {10, 11, 0.1966, 0.0650, 45, 30, "commercial"},
    {11, 12, 0.3744, 0.1238, 60, 35, "commercial"},
    {12, 13, 1.4680, 1.1550, 60, 35, "hospital"},
    {13, 14, 0.5416, 0.7129, 120, 80, "industrial"},
    {14, 15, 0.5910, 0.5260, 60, 10, "municipal"},
    {15, 16, 0.7463, 0.5450, 60, 20, "food_service"},
    {16, 17, 1.2890, 1.7210, 60, 20, "food_service"},
    {17, 18, 0.7320, 0.5740, 90, 40, "municipal"},
    {2, 19, 0.1640, 0.1565, 90, 40, "integrated"},
    {19, 20, 1.5042, 1.3554, 90, 40, "education"},
    {20, 21, 0.4095, 0.4784, 90, 40, "municipal"},
    {21, 22, 0.7089, 0.9373, 90, 40, "integrated"},
    {3, 23, 0.4512, 0.3083, 90, 50, "industrial"},
    {23, 24, 0.8980, 0.7091, 420, 200, "industrial"},
    {24, 25, 0.8960, 0.7011, 420, 200, "industrial"},
    {6, 26, 0.2030, 0.1034, 60, 25, "food_service"},
    {26, 27, 0.2842, 0.1447, 60, 25, "agriculture"},
    {27, 28, 1.0590, 0.9337, 60, 20, "food_service"},
    {28, 29, 0.8042, 0.7006, 120, 70, "park"},
    {29, 30, 0.5075, 0.2585, 200, 600, "industrial"},
    {30, 31, 0.9744, 0.9630, 150, 70, "municipal"},
    {31, 32, 0.3105, 0.3619, 210, 100, "commercial"},
    {32, 33, 0.3410, 0.5302, 60, 40, "agriculture"},
}};

template <int P = 3>
DistributionNetwork<P> network(double ampacity_a = 1000.0) {
  std::vector<Branch<P>> branches;
  for (const auto& r : kRows) branches.push_back(balanced_branch<P>(r.from, r.to, r.r_ohm, r.x_ohm, 0.0, ampacity_a));
  return DistributionNetwork<P>(33, 1, std::move(branches), Bases{12.66, 10.0}, 1.0);
}

template <int P = 3>
LoadSet<P> loads() {
  LoadSet<P> l(33);
  for (const auto& r : kRows) l[r.to - 1] = BusLoad<P>::balanced(r.p_kw, r.q_kvar, std::string(r.category));
  return l;
}

}  // namespace ieee33
}  // namespace evplan::grid
