#pragma once

#include <cstddef>
#include <stdexcept>

namespace fedhp {

// Symbols of the decentralized local-SGD convergence bound.
struct BoundParams {
    double L = 1.0;       // smoothness
    double sigma = 0.0;   // stochastic-gradient noise
    double zeta = 0.0;    // data heterogeneity (supplied, never estimated)
    double rho = 0.0;     // spectral gap of the mixing matrix
    double eta = 0.01;    // learning rate
    double tau = 1.0;     // local updating frequency
    double H = 1.0;       // communication rounds
    double N = 1.0;       // workers
    double f1 = 1.0;      // f(x^1)
    double f_star = 0.0;  // f(x*)
};

// Raised when the parameters fall outside the region where the bound holds.
class BoundDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Average squared gradient-norm bound after H rounds:
//   4 (f1 - f*) a / (eta tau H b) + 8 L^2 eta^2 (sigma^2 + 3 zeta^2) / b
//     + (a / b) 4 L eta tau sigma^2 / N
// with a = (1-rho)^2 - 3 eta^2 L^2 and b = (1-rho)^2 - 27 eta^2 L^2.
// Requires b > 0 and eta <= 1 / (4 L tau).
double convergence_bound(const BoundParams& p);

// eta = (6L / sqrt((1-rho)^2) + sigma tau sqrt(H / N) + zeta^(2/3) H^(1/3))^-1.
double suggested_eta(const BoundParams& p);

// sigma / sqrt(N H) + (zeta / H)^(2/3) / (1-rho)^2 + 1 / (H tau^2 (1-rho)^2).
double convergence_rate(const BoundParams& p);

// sqrt(N (f1 - f*) / (L H eta^2 sigma^2)): the tau that minimises
// convergence_bound. +inf when sigma == 0.
double tau_threshold(const BoundParams& p);

}  // namespace fedhp
