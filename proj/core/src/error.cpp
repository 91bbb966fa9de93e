#include "cardie/error.hpp"

#include <utility>

namespace cardie {

Error::Error(ErrorKind kind, std::string code, const std::string& message)
    : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

DecodeError::DecodeError(std::string entry_id, const std::string& message)
    : Error(ErrorKind::data, "decode",
            entry_id.empty() ? message : "[" + entry_id + "] " + message),
      entry_id_(std::move(entry_id)) {}

}  // namespace cardie
