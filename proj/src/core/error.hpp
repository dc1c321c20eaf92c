//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace edgeplan {

// Failure classes, ordered by how the CLI maps them to exit status:
// validation problems (bad files, bad arguments) are distinct from
// infeasibility (a plan that cannot fit the device) and from
// verification failures (staged execution diverging from monolithic).
enum class ErrorCode {
    InvalidArgument,
    Parse,
    Validation,
    Infeasible,
    Verification,
    Io,
    Internal,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace edgeplan
