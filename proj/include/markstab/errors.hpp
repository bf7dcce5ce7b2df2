#pragma once

#include <stdexcept>
#include <string>

namespace markstab {

// Input files that fail to parse. Messages carry the offending line number
// where one exists.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural violations of the simple-graph contract.
struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SelfLoopError : GraphError {
  using GraphError::GraphError;
};

struct DuplicateEdgeError : GraphError {
  using GraphError::GraphError;
};

// Raised by operations that require a connected input.
struct DisconnectedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A statistic whose defining denominator vanishes (e.g. degree correlation
// on a regular graph).
struct DegenerateVarianceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Using a model (embedding or boosted trees) before it has been trained,
// or loading one whose persisted form is unusable.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VersionError : ModelError {
  using ModelError::ModelError;
};

// Benchmark specification that cannot be realized as a simple graph.
struct InfeasibleSpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wraps a failure inside the detect pipeline with the step it came from.
struct PipelineStepError : std::runtime_error {
  PipelineStepError(int step, const std::string& label,
                    const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + " (" + label +
                           "): " + what),
        step(step) {}
  int step;
};

}  // namespace markstab
