#pragma once

#include <stdexcept>
#include <string>

namespace hnm {

/// Coarse classification used by the command-line front end to pick an exit status.
enum class ErrorCategory { Config, Precondition, Resource };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

#define HNM_DEFINE_ERROR(Name, Category)                                       \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what)                                     \
        : Error(ErrorCategory::Category, #Name ": " + what) {}                 \
  }

// model / configuration
HNM_DEFINE_ERROR(ConfigError, Config);
HNM_DEFINE_ERROR(NormalizationError, Config);
HNM_DEFINE_ERROR(SpacingError, Config);
HNM_DEFINE_ERROR(EmptyError, Config);
HNM_DEFINE_ERROR(GridMismatch, Config);
HNM_DEFINE_ERROR(CutoffError, Config);

// violated preconditions of an operation
HNM_DEFINE_ERROR(DomainError, Precondition);
HNM_DEFINE_ERROR(DimensionError, Precondition);
HNM_DEFINE_ERROR(SupportError, Precondition);
HNM_DEFINE_ERROR(WindowError, Precondition);
HNM_DEFINE_ERROR(OrderingError, Precondition);

// memory or truncation budget exhausted
HNM_DEFINE_ERROR(ResourceError, Resource);
HNM_DEFINE_ERROR(TruncationOverflow, Resource);

#undef HNM_DEFINE_ERROR

} // namespace hnm
