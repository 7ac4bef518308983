#pragma once

#include <stdexcept>
#include <string>

namespace wsnloc {

// Raised for contract violations and unrecoverable pipeline failures. The
// message strings are stable and tests match on them.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wsnloc
