#pragma once

#include <cmath>

namespace feedopt {

struct Point {
  double x = 0.0;  // km
  double y = 0.0;  // km
};

inline double euclid_km(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline bool same_point(const Point& a, const Point& b, double tol = 1e-12) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol;
}

}  // namespace feedopt
