#pragma once

#include <stdexcept>
#include <string>

namespace ejcorr {

/// Base of every exception thrown by the library. The category maps onto the
/// command-line exit codes (1 usage, 2 data, 3 training divergence).
class Error : public std::runtime_error {
public:
    enum class Category { usage, data, divergence, domain };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }
    int exit_code() const noexcept {
        switch (category_) {
            case Category::data: return 2;
            case Category::divergence: return 3;
            default: return 1;
        }
    }

private:
    Category category_;
};

/// Bad call sequence or invalid configuration.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(Category::usage, what) {}
};

/// Malformed, missing or degenerate input data.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Category::data, what) {}
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(Category::domain, what) {}
};

/// Non-finite loss or gradient during training.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(Category::divergence, what) {}
};

}  // namespace ejcorr
