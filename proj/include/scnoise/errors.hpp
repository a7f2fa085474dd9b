#pragma once

#include <stdexcept>
#include <string>

namespace scnoise {

// Every failure mode the library can report. The CLI maps each code to a
// distinct process exit code (see errc_exit_code / `scnoise --help`).
enum class Errc {
  FileNotFound,
  SyntaxError,
  DuplicateName,
  UnknownPhase,
  NonPositiveValue,
  MissingGround,
  UnresolvedName,
  PlanInvalid,
  OtaPresent,
  MultipleOtas,
  NoFeedbackPath,
  SenseNodeIsolated,
  SingularNetwork,
  NegativeVariance,
  IndeterminateSolve,
  SingularAtFrequency,
  NotConverged,
  TimestepTooCoarse,
  UnstableIntegration,
  SweepEmpty,
  BadArguments,
};

const char* errc_name(Errc code) noexcept;
int errc_exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace scnoise
