#pragma once

#include <stdexcept>
#include <string>

namespace doa {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Demographics or PD constants outside the range where the PK formulas hold.
struct InvalidDemographics : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

// Non-finite sample fed to an operator or controller.
struct NumericInputError : Error {
  using Error::Error;
};

// Gene vector length does not match the layout of the requested variant.
struct LayoutError : Error {
  using Error::Error;
};

struct DivergenceError : Error {
  DivergenceError(const std::string& what, double t_min)
      : Error(what), time_min(t_min) {}
  double time_min;
};

}  // namespace doa
