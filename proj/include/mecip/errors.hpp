#pragma once

#include <stdexcept>
#include <string>

namespace mecip {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad call arguments or violated preconditions.
struct argument_error : error {
    using error::error;
};

// Malformed input files (CSV, BIF, edge lists, benchmark specs).
struct parse_error : error {
    using error::error;
};

// Declared network structure is not a DAG.
struct structural_error : error {
    using error::error;
};

// A configured budget (candidate sets, solver rounds) was exhausted.
struct resource_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

} // namespace mecip
