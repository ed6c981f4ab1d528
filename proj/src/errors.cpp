#include "satrack/errors.hpp"

namespace satrack {

const char* category_name(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::internal: return "internal";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::io: return "io";
    case ErrorCategory::non_convergence: return "non_convergence";
    case ErrorCategory::domain_exit: return "domain_exit";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::configuration: return "configuration";
    case ErrorCategory::input: return "input";
    }
    return "internal";
}

}  // namespace satrack
