#pragma once

#include <stdexcept>
#include <string>

namespace sepchain {

//! invalid construction parameters (bit widths, shifts, bucket counts, ...)
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

//! an argument lies outside the domain of an operation (key >= 2^k, value too wide, ...)
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

//! a structure cannot grow any further (bucket count beyond 2^k, counter wider than allowed)
struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

//! the allocation ledger was asked to release more bytes than it holds
struct AccountingFault : std::logic_error {
    using std::logic_error::logic_error;
};

//! a self-verifying benchmark or application detected a wrong answer
struct CorrectnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sepchain
