#pragma once

#include <stdexcept>
#include <string>

namespace tropitest {

// Broad classes used to pick a process exit code.
enum class ErrorClass {
  kUsage,     // bad parameters or configuration
  kData,      // inputs that cannot be processed as given
  kInternal,  // everything else
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass error_class, const std::string& what)
      : std::runtime_error(what), class_(error_class) {}

  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define TROPITEST_DEFINE_ERROR(Name, Class)                  \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what)                   \
        : Error(ErrorClass::Class, what) {}                  \
  };

TROPITEST_DEFINE_ERROR(ParameterError, kUsage)
TROPITEST_DEFINE_ERROR(ConfigurationError, kUsage)
TROPITEST_DEFINE_ERROR(InputError, kData)
TROPITEST_DEFINE_ERROR(ParseError, kData)
TROPITEST_DEFINE_ERROR(CapacityError, kData)
TROPITEST_DEFINE_ERROR(RegularizationError, kData)
TROPITEST_DEFINE_ERROR(DegenerateInputError, kData)
TROPITEST_DEFINE_ERROR(IoError, kData)
TROPITEST_DEFINE_ERROR(RefusalError, kUsage)

#undef TROPITEST_DEFINE_ERROR

}  // namespace tropitest
