#pragma once

#include <stdexcept>
#include <string>

namespace dentgan {

/// Base of every error raised by the library. Callers that only need a
/// message can catch this; the CLI maps it to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define DENTGAN_DEFINE_ERROR(Name)            \
    class Name : public Error {               \
    public:                                   \
        explicit Name(const std::string& msg) \
            : Error(#Name ": " + msg) {}      \
    }

DENTGAN_DEFINE_ERROR(UnknownColor);
DENTGAN_DEFINE_ERROR(InvalidSpec);
DENTGAN_DEFINE_ERROR(InvalidConfig);
DENTGAN_DEFINE_ERROR(MissingMask);
DENTGAN_DEFINE_ERROR(DimensionMismatch);
DENTGAN_DEFINE_ERROR(ShapeMismatch);
DENTGAN_DEFINE_ERROR(NonFiniteActivation);
DENTGAN_DEFINE_ERROR(EmptyDataset);
DENTGAN_DEFINE_ERROR(IoError);
DENTGAN_DEFINE_ERROR(VersionMismatch);
DENTGAN_DEFINE_ERROR(CorruptChecksum);

#undef DENTGAN_DEFINE_ERROR

}  // namespace dentgan
