#include "flexkit/uncertain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flexkit/errors.hpp"

namespace flexkit {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kMergeGap = 1e-12;

std::vector<double> trimmed(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

// Real roots of c0 + c1 e + c2 e^2 (c2 != 0 unless degree < 2).
std::vector<double> quadratic_roots(double c0, double c1, double c2) {
  if (c2 == 0.0) {
    if (c1 == 0.0) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  // numerically stable pair
  const double q = -0.5 * (c1 + std::copysign(sq, c1));
  std::vector<double> roots;
  if (q != 0.0) {
    roots.push_back(q / c2);
    roots.push_back(c0 / q);
  } else {
    roots.push_back(0.0);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double bisect(const std::vector<double>& c, double lo, double hi) {
  double flo = eval_poly(c, lo);
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = eval_poly(c, mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> roots_in(const std::vector<double>& c, double lo, double hi) {
  std::vector<double> roots;
  switch (c.size()) {
    case 1: break;
    case 2: roots = quadratic_roots(c[0], c[1], 0.0); break;
    case 3: roots = quadratic_roots(c[0], c[1], c[2]); break;
    default: {
      // split the domain at critical points, then bisect every monotone piece
      std::vector<double> cuts = {lo};
      for (double r : quadratic_roots(c[1], 2.0 * c[2], 3.0 * c[3])) {
        if (r > lo && r < hi) cuts.push_back(r);
      }
      cuts.push_back(hi);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        const double fa = eval_poly(c, a);
        const double fb = eval_poly(c, b);
        if (fa == 0.0) roots.push_back(a);
        if (fb == 0.0) roots.push_back(b);
        if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) roots.push_back(bisect(c, a, b));
      }
      break;
    }
  }
  std::vector<double> inside;
  for (double r : roots) {
    if (r >= lo && r <= hi) inside.push_back(r);
  }
  std::sort(inside.begin(), inside.end());
  return inside;
}

std::vector<EnergyBounds> merge(std::vector<EnergyBounds> v) {
  std::sort(v.begin(), v.end(), [](const EnergyBounds& a, const EnergyBounds& b) { return a.lower < b.lower; });
  std::vector<EnergyBounds> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lower <= out.back().upper + kMergeGap) {
      out.back().upper = std::max(out.back().upper, iv.upper);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// {e in [lo, hi] : p(e) >= level}
std::vector<EnergyBounds> superlevel(const std::vector<double>& poly, double level, double lo, double hi) {
  std::vector<double> q = trimmed(poly);
  q[0] -= level;
  std::vector<double> cuts = {lo};
  const auto roots = roots_in(q, lo, hi);
  cuts.insert(cuts.end(), roots.begin(), roots.end());
  cuts.push_back(hi);
  std::vector<EnergyBounds> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (b - a <= 0.0) continue;
    if (eval_poly(q, 0.5 * (a + b)) >= 0.0) pieces.push_back({a, b});
  }
  // tangential roots and degenerate domains contribute single points
  for (double r : roots) {
    if (eval_poly(q, r) >= -1e-12) pieces.push_back({r, r});
  }
  if (hi == lo && eval_poly(q, lo) >= 0.0) pieces.push_back({lo, lo});
  return merge(std::move(pieces));
}

std::vector<EnergyBounds> intersect(const std::vector<EnergyBounds>& a, const std::vector<EnergyBounds>& b) {
  std::vector<EnergyBounds> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lower, b[j].lower);
    const double hi = std::min(a[i].upper, b[j].upper);
    if (lo <= hi) out.push_back({lo, hi});
    if (a[i].upper < b[j].upper) ++i;
    else ++j;
  }
  return out;
}

}  // namespace

double eval_poly(const std::vector<double>& coeffs, double e) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * e + *it;
  return acc;
}

double evaluate(const UncertainFunction& f, double e) {
  if (e < f.domain.lower - kDomainSlack || e > f.domain.upper + kDomainSlack) {
    throw DomainError("energy " + std::to_string(e) + " outside uncertain-function domain [" +
                      std::to_string(f.domain.lower) + ", " + std::to_string(f.domain.upper) + "]");
  }
  double m = INFINITY;
  for (const auto& p : f.polys) m = std::min(m, eval_poly(p, e));
  return std::clamp(m, 0.0, 1.0);
}

std::vector<EnergyBounds> threshold_intervals(const UncertainFunction& f, double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("probability threshold must lie in [0, 1]");
  const double lo = f.domain.lower;
  const double hi = f.domain.upper;
  // clamp(m, 0, 1) >= 0 everywhere; for p0 > 0 it is equivalent to m >= p0
  if (p0 <= 0.0) return {{lo, hi}};
  std::vector<EnergyBounds> acc = {{lo, hi}};
  for (const auto& p : f.polys) {
    acc = intersect(acc, superlevel(p, p0, lo, hi));
    if (acc.empty()) break;
  }
  return acc;
}

}  // namespace flexkit
