#pragma once

#include <stdexcept>
#include <string>

namespace branchmc {

/// Invalid argument / violated precondition. Message names the violated condition.
class argument_error : public std::invalid_argument {
public:
    explicit argument_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: quadrature non-convergence, NaN/blowup in a solver, ...
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A branching tree exceeded its particle budget.
class explosion_error : public std::runtime_error {
public:
    explicit explosion_error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression parsing failure; carries the byte offset of the offending token.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace branchmc
