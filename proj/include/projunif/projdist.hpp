#pragma once

// Law of the projection gamma'X of a uniform point X on the sphere of
// dimension q onto a fixed direction gamma.

namespace projunif {

/// B(1/2, q/2)^{-1} (1 - t^2)^{q/2 - 1}. Infinite at t = +-1 when q = 1.
double proj_density(int q, double t);

/// F_q(x), exact 0 and 1 at the endpoints.
double proj_cdf(int q, double x);

/// Inverse of F_q; returns exactly 0 at p = 1/2.
double proj_quantile(int q, double p);

/// log B(1/2, q/2), the normalizing constant of the projected density.
double proj_log_norm(int q);

}  // namespace projunif
