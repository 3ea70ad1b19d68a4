// kropina - trajectory comparison metrics
#ifndef KROPINA_METRICS_HPP_
#define KROPINA_METRICS_HPP_

#include "kropina/ode.hpp"
#include "kropina/types.hpp"

namespace kropina {

/// Discrete Frechet distance between two polylines of points.
double discrete_frechet(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// Resamples a polyline to m points equally spaced in Euclidean arc length.
std::vector<Vec> resample_by_arclength(const std::vector<Vec>& pts, int m);

/// Frechet distance after arc-length resampling both traces to m points;
/// the comparison the projective-equivalence checks use. The resampling
/// density bounds the polyline discretization error by roughly
/// curvature * (arclength / m)^2 / 8, so the default resolves 1e-5 on
/// unit-length desk-scale arcs.
double trace_distance(const std::vector<Vec>& a, const std::vector<Vec>& b,
                      int m = 4096);

/// sup_t |x_a(t) - x_b(t)| over the common time span. When the sample times
/// of both trajectories coincide (within 1e-12) the comparison is pointwise;
/// otherwise b is linearly interpolated at a's times.
double sup_distance(const Trajectory& a, const Trajectory& b);

}  // namespace kropina

#endif  // KROPINA_METRICS_HPP_
