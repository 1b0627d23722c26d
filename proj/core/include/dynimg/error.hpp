#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dynimg {

enum class ErrorCode {
  EmptyInput,
  DimensionMismatch,
  IndexOutOfRange,
  NonFiniteValue,
  InvalidDepth,
  NegativeLambda,
  InvalidArgument,
  ChannelMismatch,
  ShapeMismatch,
  InvalidLabel,
  TruncatedHeader,
  InvalidHeader,
  BadMagic,
  UnsupportedDatatype,
  UnsupportedRank,
  IoError,
  NonFiniteVoxel,
  SizeMismatch,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Typed failure raised by every public operation in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dynimg
