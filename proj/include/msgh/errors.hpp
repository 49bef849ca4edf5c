#pragma once

#include <stdexcept>

namespace msgh {

/// Boundary GIG parameter sets (gamma = 0 or delta = 0) are representable
/// but outside what the numeric operations support.
struct boundary_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Raised where only the NIG order (lambda = -1/2) is implemented.
struct unsupported_order_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A rotated coordinate carries no information (zero residual variance).
struct degenerate_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A mixture component lost essentially all its observations.
struct empty_component_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace msgh
