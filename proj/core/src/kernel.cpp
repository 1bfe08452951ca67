#include "whits/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "whits/geo.hpp"

namespace whits {

void KernelParams::validate() const {
  if (!(alpha_dist > 0.0 && alpha_age > 0.0 && alpha_vec > 0.0 && alpha_wind > 0.0)) {
    throw InputError("kernel exponents must be positive");
  }
  if (!(radius_deg > 0.0)) throw InputError("radius_deg must be positive");
}

double bisquare(double u, double alpha) {
  if (!(u < 1.0)) return 0.0;
  return std::pow(1.0 - u * u, alpha);
}

Covariates covariates(PointRef source, PointRef candidate, const SegmentLibrary& library,
                      const KernelParams& params) {
  const auto& a = library.point(source);
  const auto& b = library.point(candidate);
  const auto& va = library.motion(source);
  const auto& vb = library.motion(candidate);
  const double d = great_circle_deg({a.lat, a.lon}, {b.lat, b.lon});
  Covariates u;
  u.u1 = std::min(d, params.radius_deg) / params.radius_deg;
  u.u2 = std::min(std::hypot(vb.vx - va.vx, vb.vy - va.vy) / library.max_v(), 1.0);
  u.u3 = std::min(std::abs(static_cast<double>(b.step_index - a.step_index)) / library.max_t(), 1.0);
  u.u4 = std::min(std::abs(b.wind_u10 - a.wind_u10) / library.max_dw(), 1.0);
  return u;
}

double kernel_weight(const Covariates& u, const KernelParams& params) {
  return bisquare(u.u1, params.alpha_dist) * bisquare(u.u2, params.alpha_vec) * bisquare(u.u3, params.alpha_age) *
         bisquare(u.u4, params.alpha_wind);
}

int default_reserved_steps(const SegmentLibrary& library, int smoothing_window) {
  const int half_window = (smoothing_window + 1) / 2;
  const int scaled = static_cast<int>(std::lround(0.05 * library.mean_track_steps()));
  return std::max({3, half_window, scaled});
}

bool is_transition_point(const SegmentLibrary& library, PointRef ref, int reserved_steps) {
  const auto n = static_cast<std::int64_t>(library.track(ref.track).points.size());
  return static_cast<std::int64_t>(ref.step) <= n - 1 - reserved_steps;
}

std::vector<Candidate> transition_weights(PointRef source, const SegmentLibrary& library,
                                          const KernelParams& params, int reserved_steps) {
  std::vector<Candidate> out;
  if (!is_transition_point(library, source, reserved_steps)) return out;
  const auto& p = library.point(source);
  double total = 0.0;
  for (const auto& ref : library.within({p.lat, p.lon}, params.radius_deg)) {
    if (ref == source || !is_transition_point(library, ref, reserved_steps)) continue;
    const double w = kernel_weight(covariates(source, ref, library, params), params);
    if (w > 0.0) {
      out.push_back({ref, w});
      total += w;
    }
  }
  if (total <= 0.0) return {};
  for (auto& c : out) c.weight /= total;
  return out;
}

}  // namespace whits
