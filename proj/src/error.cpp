#include "mfindex/error.hpp"

namespace mfindex {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

ConvergenceError::ConvergenceError(const std::string& what, double residual)
    : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

InsufficientFeaturesError::InsufficientFeaturesError(std::size_t found, std::size_t wanted)
    : Error("insufficient feature points: found " + std::to_string(found) + " of " +
            std::to_string(wanted) + " requested constituents"),
      found_(found),
      wanted_(wanted) {}

MissingPriceError::MissingPriceError(const std::string& ticker, const std::string& date)
    : Error("missing price for " + ticker + " on " + date) {}

}  // namespace mfindex
