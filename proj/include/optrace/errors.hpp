#pragma once

#include <stdexcept>

// Error taxonomy. Configuration problems (bad fields, impossible geometry)
// are kept distinct from numerical failures so the CLI can map them to
// different exit codes, and so tests can assert on the precise failure kind.

namespace optrace {

// Malformed or inconsistent run configuration; message carries the field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An evaluation point or contour came too close to a pole of a trace function.
class PoleProximityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed eigenvalue fell outside the localization interval of its cluster.
class ClusteringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A quantity that is real by symmetry came back with a material imaginary part.
class SymmetryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace optrace
