#pragma once

#include <stdexcept>
#include <string>

namespace cls {

// Bad arguments, malformed files, mismatched dimensions.
class usage_error : public std::invalid_argument {
public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// Inputs outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Coincident points where a derivative or direction is undefined.
class singularity_error : public domain_error {
public:
  explicit singularity_error(const std::string& what) : domain_error(what) {}
};

// Logit requested for a link that takes values 0 or 1.
class unbounded_logit_error : public domain_error {
public:
  explicit unbounded_logit_error(const std::string& what) : domain_error(what) {}
};

// Rejection sampling exceeded its proposal budget.
class sampling_error : public std::runtime_error {
public:
  explicit sampling_error(const std::string& what) : std::runtime_error(what) {}
};

// No restart of an optimizer produced a usable result.
class optimization_error : public std::runtime_error {
public:
  explicit optimization_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cls
