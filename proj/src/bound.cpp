#include "fedhp/bound.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fedhp {

namespace {

void require_nonnegative(const BoundParams& p) {
    const double values[] = {p.L, p.sigma, p.zeta, p.rho, p.eta, p.tau, p.H, p.N, p.f1, p.f_star};
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw BoundDomainError("bound parameters must be finite and non-negative");
    }
}

}  // namespace

double convergence_bound(const BoundParams& p) {
    require_nonnegative(p);
    if (p.rho >= 1.0) throw BoundDomainError("rho must be < 1");
    if (p.eta <= 0.0 || p.tau <= 0.0 || p.H <= 0.0 || p.N <= 0.0) {
        throw BoundDomainError("eta, tau, H and N must be positive");
    }
    const double gap2 = (1.0 - p.rho) * (1.0 - p.rho);
    const double el2 = p.eta * p.eta * p.L * p.L;
    const double a = gap2 - 3.0 * el2;
    const double b = gap2 - 27.0 * el2;
    if (!(b > 0.0)) throw BoundDomainError("validity condition (1-rho)^2 - 27 eta^2 L^2 > 0 violated");
    if (p.L > 0.0 && p.eta > 1.0 / (4.0 * p.L * p.tau)) {
        throw BoundDomainError("validity condition eta <= 1/(4 L tau) violated");
    }
    const double optimisation = 4.0 * (p.f1 - p.f_star) * a / (p.eta * p.tau * p.H * b);
    const double heterogeneity = 8.0 * p.L * p.L * p.eta * p.eta * (p.sigma * p.sigma + 3.0 * p.zeta * p.zeta) / b;
    const double local_noise = (a / b) * 4.0 * p.L * p.eta * p.tau * p.sigma * p.sigma / p.N;
    return optimisation + heterogeneity + local_noise;
}

double suggested_eta(const BoundParams& p) {
    require_nonnegative(p);
    if (p.N <= 0.0) throw BoundDomainError("N must be positive");
    const double gap = std::sqrt((1.0 - p.rho) * (1.0 - p.rho));
    const double topo_term = p.L > 0.0 ? 6.0 * p.L / gap : 0.0;
    const double noise_term = p.sigma * p.tau * std::sqrt(p.H) / std::sqrt(p.N);
    const double het_term = std::cbrt(p.zeta * p.zeta) * std::cbrt(p.H);
    const double denom = topo_term + noise_term + het_term;
    if (!std::isfinite(denom)) throw BoundDomainError("learning-rate denominator is not finite (rho == 1?)");
    if (!(denom > 0.0)) throw BoundDomainError("learning-rate denominator is zero");
    return 1.0 / denom;
}

double convergence_rate(const BoundParams& p) {
    require_nonnegative(p);
    if (p.rho >= 1.0) throw BoundDomainError("rho must be < 1");
    if (p.H <= 0.0 || p.N <= 0.0 || p.tau <= 0.0) throw BoundDomainError("tau, H and N must be positive");
    const double gap2 = (1.0 - p.rho) * (1.0 - p.rho);
    return p.sigma / std::sqrt(p.N * p.H) + std::cbrt((p.zeta / p.H) * (p.zeta / p.H)) / gap2 +
           1.0 / (p.H * p.tau * p.tau * gap2);
}

double tau_threshold(const BoundParams& p) {
    require_nonnegative(p);
    const double denom = p.L * p.H * p.eta * p.eta * p.sigma * p.sigma;
    if (p.f1 < p.f_star) throw BoundDomainError("f1 must be >= f_star");
    if (p.sigma == 0.0) return std::numeric_limits<double>::infinity();
    if (!(denom > 0.0)) throw BoundDomainError("L, H and eta must be positive");
    return std::sqrt(p.N * (p.f1 - p.f_star) / denom);
}

}  // namespace fedhp
