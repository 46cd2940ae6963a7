#ifndef FMLFS_ERROR_H_
#define FMLFS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fmlfs {

// Broad classes of failure. The CLI maps kInvalidArgument to exit code 1 and
// everything else to exit code 2.
enum class ErrorCode {
  kInvalidArgument,
  kDataError,
  kProtocolError,
  kTimeout,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgument(const std::string& msg) {
  return Error(ErrorCode::kInvalidArgument, msg);
}
inline Error DataError(const std::string& msg) {
  return Error(ErrorCode::kDataError, msg);
}
inline Error ProtocolError(const std::string& msg) {
  return Error(ErrorCode::kProtocolError, msg);
}

}  // namespace fmlfs

#endif  // FMLFS_ERROR_H_
