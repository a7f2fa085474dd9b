#include "scnoise/errors.hpp"

namespace scnoise {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::UnknownPhase: return "UnknownPhase";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::MissingGround: return "MissingGround";
    case Errc::UnresolvedName: return "UnresolvedName";
    case Errc::PlanInvalid: return "PlanInvalid";
    case Errc::OtaPresent: return "OtaPresent";
    case Errc::MultipleOtas: return "MultipleOtas";
    case Errc::NoFeedbackPath: return "NoFeedbackPath";
    case Errc::SenseNodeIsolated: return "SenseNodeIsolated";
    case Errc::SingularNetwork: return "SingularNetwork";
    case Errc::NegativeVariance: return "NegativeVariance";
    case Errc::IndeterminateSolve: return "IndeterminateSolve";
    case Errc::SingularAtFrequency: return "SingularAtFrequency";
    case Errc::NotConverged: return "NotConverged";
    case Errc::TimestepTooCoarse: return "TimestepTooCoarse";
    case Errc::UnstableIntegration: return "UnstableIntegration";
    case Errc::SweepEmpty: return "SweepEmpty";
    case Errc::BadArguments: return "BadArguments";
  }
  return "UnknownError";
}

int errc_exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::FileNotFound: return 2;
    case Errc::SyntaxError: return 3;
    case Errc::DuplicateName: return 4;
    case Errc::UnknownPhase: return 5;
    case Errc::NonPositiveValue: return 6;
    case Errc::MissingGround: return 7;
    case Errc::UnresolvedName: return 8;
    case Errc::PlanInvalid: return 9;
    case Errc::OtaPresent: return 10;
    case Errc::MultipleOtas: return 11;
    case Errc::NoFeedbackPath: return 12;
    case Errc::SenseNodeIsolated: return 13;
    case Errc::SingularNetwork: return 14;
    case Errc::NegativeVariance: return 15;
    case Errc::IndeterminateSolve: return 16;
    case Errc::SingularAtFrequency: return 17;
    case Errc::NotConverged: return 18;
    case Errc::TimestepTooCoarse: return 19;
    case Errc::UnstableIntegration: return 20;
    case Errc::SweepEmpty: return 21;
    case Errc::BadArguments: return 22;
  }
  return 1;
}

}  // namespace scnoise
