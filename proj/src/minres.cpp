#include "vortex/minres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vortex::opt {

// Paige-Saunders recurrence with Lanczos vectors in the M-inner product.
MinresResult minres(const std::function<void(const Vec&, Vec&)>& apply_a,
                    const std::function<void(const Vec&, Vec&)>& apply_m,
                    const std::function<double(const Vec&, const Vec&)>& dot, const Vec& b, Vec& x,
                    double rtol, int max_iter) {
  const std::size_t n = b.size();
  MinresResult res;
  x.assign(n, 0.0);
  Vec r1 = b, r2 = b, y(n), v(n), w(n, 0.0), w1(n), w2(n, 0.0);
  apply_m(r1, y);
  const double ry = dot(r1, y);
  if (ry < 0.0) throw std::runtime_error("minres: preconditioner is not positive definite");
  const double beta1 = std::sqrt(ry);
  if (beta1 == 0.0) {
    res.converged = true;
    return res;
  }
  double beta = beta1, oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  const double tiny = std::numeric_limits<double>::min();

  for (int it = 1; it <= max_iter; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t k = 0; k < n; ++k) v[k] = s * y[k];
    apply_a(v, y);
    if (it >= 2)
      for (std::size_t k = 0; k < n; ++k) y[k] -= (beta / oldb) * r1[k];
    const double alfa = dot(v, y);
    for (std::size_t k = 0; k < n; ++k) y[k] -= (alfa / beta) * r2[k];
    r1.swap(r2);
    r2 = y;
    apply_m(r2, y);
    oldb = beta;
    const double yy = dot(r2, y);
    if (yy < 0.0) throw std::runtime_error("minres: preconditioner is not positive definite");
    beta = std::sqrt(yy);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar *= sn;

    const double denom = 1.0 / gamma;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) * denom;
      x[k] += phi * w[k];
    }
    res.iterations = it;
    res.residual = phibar / beta1;
    if (res.residual <= rtol) {
      res.converged = true;
      break;
    }
    if (beta == 0.0) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace vortex::opt
