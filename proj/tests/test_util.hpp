#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bandsim/env.hpp"

namespace test_util {

// Independent enumeration oracle: the best single-broadcast expected payoff
// for a context profile, by trying every message.
inline double best_broadcast_value(const bandsim::PayoffModel& p,
                                   const std::vector<int>& contexts) {
  double best = -1.0;
  for (int m = 0; m < p.num_messages; ++m) {
    double v = 0.0;
    for (int k : contexts) v += p.value(k, m);
    best = std::max(best, v);
  }
  return best;
}

inline double best_per_user_value(const bandsim::PayoffModel& p,
                                  const std::vector<int>& contexts) {
  double total = 0.0;
  for (int k : contexts) {
    double best = -1.0;
    for (int m = 0; m < p.num_messages; ++m) best = std::max(best, p.value(k, m));
    total += best;
  }
  return total;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string temp_path(const std::string& name) {
  return std::string("bandsim_test_") + name;
}

}  // namespace test_util
