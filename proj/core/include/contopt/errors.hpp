#ifndef CONTOPT_ERRORS_HPP
#define CONTOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace contopt {

// Scene/config file problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static solve or optimization failures. CLI maps these to exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace contopt

#endif
