#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spelke {

using Location = std::uint32_t;   // row-major grid location index
using Token = std::uint32_t;      // id in the unified vocabulary

// Error categories map 1:1 onto CLI exit codes (see tools/).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A structurally valid request whose result is degenerate (e.g. Otsu on a
// constant map, a poke on background yielding an empty segment).
struct degenerate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model backend asked to do something outside its contract (unknown
// context in a file-backed dump, sequential decode without conditioning
// support, malformed records).
struct model_contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace spelke
