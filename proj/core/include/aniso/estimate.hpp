#pragma once

namespace aniso {

/// A numerical value with its error estimate (standard error for Monte Carlo,
/// fine/coarse difference for deterministic quadrature). Never a bare number.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

}  // namespace aniso
