#ifndef CZK_ERRORS_HPP_
#define CZK_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace czk {

// Harness-level contract violations. Protocol rejections and aborts are
// values, never exceptions; these types mark bugs or misuse.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parameter_error : error { using error::error; };
struct arity_error : error { using error::error; };
struct protocol_order_error : error { using error::error; };
struct state_error : error { using error::error; };
struct mapping_error : error { using error::error; };
struct unsupported_reduction_error : error { using error::error; };
struct precondition_error : error { using error::error; };
struct hybrid_violation_error : error { using error::error; };
struct io_error : error { using error::error; };

}  // namespace czk

#endif  // CZK_ERRORS_HPP_
