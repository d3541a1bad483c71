#include "treeshift/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <gsl/gsl_sf_zeta.h>

#include "treeshift/error.hpp"

namespace treeshift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double constant_log_sum(double c, std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) {
  if (c == 1.0) return 0.0;
  if (!lo || !hi) return c < 1.0 ? kNegInf : std::numeric_limits<double>::infinity();
  if (*hi < *lo) return 0.0;
  return static_cast<double>(*hi - *lo + 1) * std::log(c);
}

// Sum over m >= a of (|m| + 1)^(-p), p > 1.
double two_sided_tail(std::int64_t a, double p) {
  if (a >= 0) return gsl_sf_hzeta(p, static_cast<double>(a) + 1.0);
  // Terms for m = a..-1 are k^(-p) with k = 2..1-a.
  return gsl_sf_hzeta(p, 2.0) - gsl_sf_hzeta(p, 2.0 - static_cast<double>(a)) + gsl_sf_hzeta(p, 1.0);
}

}  // namespace

RayRule RayRule::constant(double c) {
  RayRule r;
  r.kind = Kind::Constant;
  r.value = c;
  return r;
}

RayRule RayRule::geometric(double scale, double ratio, std::int64_t from, double below) {
  RayRule r;
  r.kind = Kind::Geometric;
  r.scale = scale;
  r.ratio = ratio;
  r.from = from;
  r.below = below;
  return r;
}

RayRule RayRule::exp_ray(double scale, double power) {
  RayRule r;
  r.kind = Kind::ExpRay;
  r.scale = scale;
  r.power = power;
  return r;
}

double RayRule::at(std::int64_t level) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Geometric:
      if (level < from) return below;
      return std::exp(-scale * std::pow(ratio, static_cast<double>(level)));
    case Kind::ExpRay:
      return std::exp(-scale / std::pow(static_cast<double>(std::llabs(level)) + 1.0, power));
  }
  return value;
}

double RayRule::log_sum(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) const {
  if (lo && hi && *hi < *lo) return 0.0;
  switch (kind) {
    case Kind::Constant:
      return constant_log_sum(value, lo, hi);

    case Kind::Geometric: {
      double total = 0.0;
      if (!lo || *lo < from) {
        std::optional<std::int64_t> top = from - 1;
        if (hi) top = std::min(*top, *hi);
        total += constant_log_sum(below, lo, top);
      }
      if (hi && *hi < from) return total;
      const std::int64_t a = lo ? std::max(*lo, from) : from;
      if (scale == 0.0) return total;
      const double ra = std::pow(ratio, static_cast<double>(a));
      if (!hi) {
        if (ratio >= 1.0) return kNegInf;
        return total - scale * ra / (1.0 - ratio);
      }
      if (ratio == 1.0) return total - scale * static_cast<double>(*hi - a + 1);
      return total - scale * (ra - std::pow(ratio, static_cast<double>(*hi + 1))) / (1.0 - ratio);
    }

    case Kind::ExpRay: {
      if (scale == 0.0) return 0.0;
      if (lo && hi && *hi - *lo < 100000) {
        double s = 0.0;
        for (std::int64_t m = *lo; m <= *hi; ++m) s += std::pow(static_cast<double>(std::llabs(m)) + 1.0, -power);
        return -scale * s;
      }
      if (power <= 1.0) return kNegInf;
      double s = 0.0;
      if (lo && hi) {
        s = two_sided_tail(*lo, power) - two_sided_tail(*hi + 1, power);
      } else if (lo) {
        s = two_sided_tail(*lo, power);
      } else if (hi) {
        s = two_sided_tail(-*hi, power);
      } else {
        s = 2.0 * gsl_sf_hzeta(power, 1.0) - 1.0;
      }
      return -scale * s;
    }
  }
  return 0.0;
}

double RayRule::sup(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) const {
  if (lo && hi && *hi < *lo) return 0.0;
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Geometric: {
      double best = 0.0;
      if (!lo || *lo < from) best = below;
      if (hi && *hi < from) return best;
      const std::int64_t a = lo ? std::max(*lo, from) : from;
      if (ratio < 1.0) return std::max(best, hi ? at(*hi) : 1.0);
      return std::max(best, at(a));
    }
    case Kind::ExpRay:
      if (!lo || !hi) return 1.0;
      return std::max(at(*lo), at(*hi));
  }
  return value;
}

WeightAssignment WeightAssignment::constant(double c) {
  WeightAssignment w;
  w.kind = Kind::Constant;
  w.rule = RayRule::constant(c);
  return w;
}

WeightAssignment WeightAssignment::map(std::map<VertexId, double> values, std::optional<double> fallback) {
  WeightAssignment w;
  w.kind = Kind::Map;
  w.values = std::move(values);
  w.fallback = fallback;
  return w;
}

WeightAssignment WeightAssignment::family(RayRule rule, std::optional<RayRule> primed) {
  WeightAssignment w;
  w.kind = Kind::Family;
  w.rule = rule;
  w.primed = std::move(primed);
  return w;
}

}  // namespace treeshift
