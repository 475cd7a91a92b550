#ifndef DEGENLAB_ERROR_HPP
#define DEGENLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace degenlab {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameters, grids or configuration documents. Carries a field
// path ("problem.grid.h") when raised by the config parser.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Coefficient evaluation at a point where the formula is singular
// (epsilon = 0 together with a vanishing gradient and a negative exponent).
class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& msg) : Error(msg) {}
};

// Non-finite value or gradient-cap violation during time stepping.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, double x, double y, double t)
        : Error(msg), x(x), y(y), t(t) {}
    double x, y, t;  // offending node
};

}  // namespace degenlab

#endif
