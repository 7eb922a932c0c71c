#pragma once

#include <stdexcept>
#include <string>

namespace mcs {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCS_DEFINE_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

MCS_DEFINE_ERROR(UnknownTask);
MCS_DEFINE_ERROR(NotHighCriticality);
MCS_DEFINE_ERROR(Infeasible);
MCS_DEFINE_ERROR(ParseError);
MCS_DEFINE_ERROR(UnreachableBlock);
MCS_DEFINE_ERROR(ConfigError);
MCS_DEFINE_ERROR(MissingMemoryData);
MCS_DEFINE_ERROR(MissingCheckpointProfile);
MCS_DEFINE_ERROR(DegenerateTask);
MCS_DEFINE_ERROR(ExhaustedRetries);

#undef MCS_DEFINE_ERROR

}  // namespace mcs
