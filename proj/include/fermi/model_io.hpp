#pragma once

#include <stdexcept>
#include <string>

#include "fermi/model.hpp"

namespace fermi {

struct ModelFile {
  LatticeSpec spec{1, 4};
  ModelParams params;
  InteractionCoefficients interaction{1};
};

// Malformed input: unreadable file, invalid JSON, missing or mistyped fields.
struct ModelParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed input whose coefficients break an invariant (hermiticity).
struct ModelInvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Schema:
//   { "d": 1, "L": 4, "t": 1.0, "t_prime": 0.0, "mu": 0.2, "beta": 1.0,
//     "interaction": [ { "order": 2,
//                        "entries": [ { "X": [[0],[0]], "Xi": [0,1], "Phi": [0,1],
//                                       "re": 0.1, "im": 0.0 } ] } ] }
// Spins are 0/1 or "up"/"down".  For d = 1 a site may be written as a bare
// integer.  An order-1 entry without "X" acts on every site.  Missing scalar
// fields take the defaults d=1, L=4, t=1, t_prime=0, mu=0.2, beta=1.
ModelFile parse_model_json(const std::string& text);
ModelFile load_model_file(const std::string& path);

}  // namespace fermi
