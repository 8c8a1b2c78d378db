#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace itq3::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// args excludes the program name. Errors are reported on err as a single
// line "itq3: error[E_...]: message".
int run(std::span<const std::string> args, std::ostream &out, std::ostream &err);

} // namespace itq3::cli
