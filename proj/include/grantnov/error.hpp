#ifndef GRANTNOV_ERROR_HPP
#define GRANTNOV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace grantnov {

enum class ErrorCode {
    usage = 1,
    io = 2,
    parse = 3,
    validation = 4,
    dimension = 5,
    numeric = 6,
    degenerate = 7,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace grantnov

#endif
