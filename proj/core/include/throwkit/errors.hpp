#pragma once

#include <stdexcept>
#include <string>

namespace throwkit {

/// Base class for all throwkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// arm_kinematics
struct DegenerateYaw : Error {
  using Error::Error;
};

// flight_dynamics
struct InvalidHorizon : Error {
  using Error::Error;
};

// brt_classifier
struct DegenerateDataset : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};

// throw_planner
struct GridMismatch : Error {
  using Error::Error;
};
struct DegenerateTriangle : Error {
  using Error::Error;
};
struct NoSolution : Error {
  using Error::Error;
};

// trajectory_gen
struct InfeasibleBoundary : Error {
  using Error::Error;
};
struct SynchronizationFailure : Error {
  using Error::Error;
};
struct OutOfRange : Error {
  using Error::Error;
};

// ballistic_sim
struct TerminalMismatch : Error {
  using Error::Error;
};
struct NoCrossing : Error {
  using Error::Error;
};

// configuration / persistence
struct ConfigError : Error {
  using Error::Error;
};
struct WriteError : Error {
  using Error::Error;
};

}  // namespace throwkit
