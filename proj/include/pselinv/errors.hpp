#pragma once

#include <stdexcept>
#include <string>

namespace pselinv {

/// Malformed input: bad file, bad generator spec, out-of-range argument.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero or tiny pivot during the unpivoted supernodal LU.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& what, long column)
        : std::runtime_error(what), column_(column) {}

    long column() const noexcept { return column_; }

private:
    long column_;
};

/// A computed result disagrees with its reference beyond tolerance.
class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A structural assumption of the algorithm was violated (symbolic bug,
/// missing block, deadlock in the runtime).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace pselinv
