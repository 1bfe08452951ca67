/**
 * @file kernel.hpp
 * @brief Standardized covariates and the product bisquare transition kernel.
 *
 * A candidate j for a transition out of source point i is weighted by
 *
 *   K(u1; a_dist) K(u2; a_vec) K(u3; a_age) K(u4; a_wind),  K(u; a) = (1 - u^2)^a,
 *
 * where u1 is the great-circle distance over the candidate radius, u2 the
 * comparative wind-vector difference over its basin maximum, u3 the absolute
 * age difference over its basin maximum and u4 the absolute U10 difference
 * over its basin maximum.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "whits/library.hpp"
#include "whits/types.hpp"

namespace whits {

struct KernelParams {
  double alpha_dist{2.0};
  double alpha_age{2.0};
  double alpha_vec{4.0};
  double alpha_wind{4.0};
  double radius_deg{2.5};

  /// Throws InputError unless all exponents are positive and radius_deg > 0.
  void validate() const;

  bool operator==(const KernelParams&) const = default;
};

struct Covariates {
  double u1{};
  double u2{};
  double u3{};
  double u4{};
};

/// (1 - u^2)^alpha on [0, 1], zero beyond.
double bisquare(double u, double alpha);

Covariates covariates(PointRef source, PointRef candidate, const SegmentLibrary& library,
                      const KernelParams& params);

/// Unnormalized product kernel.
double kernel_weight(const Covariates& u, const KernelParams& params);

struct Candidate {
  PointRef target;
  double weight{};

  bool operator==(const Candidate&) const = default;
};

/// Terminal steps of every track that never host a transition, in or out.
int default_reserved_steps(const SegmentLibrary& library, int smoothing_window = 5);

/// True when `ref` lies before its track's reserved terminal steps.
bool is_transition_point(const SegmentLibrary& library, PointRef ref, int reserved_steps);

/**
 * @brief Normalized candidate list for a transition out of `source`.
 *
 * Candidates are library points within the radius, excluding the source
 * point itself and points inside their own track's reserved tail. Candidates
 * whose product kernel is exactly zero are omitted. An empty result means no
 * transition is possible from `source`.
 */
std::vector<Candidate> transition_weights(PointRef source, const SegmentLibrary& library,
                                          const KernelParams& params, int reserved_steps);

}  // namespace whits
