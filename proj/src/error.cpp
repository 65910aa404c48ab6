#include "plmcurate/error.hpp"

namespace plmc {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::LengthNotMultipleOfThree: return "LengthNotMultipleOfThree";
    case Errc::InternalStopCodon: return "InternalStopCodon";
    case Errc::EmptyTranslation: return "EmptyTranslation";
    case Errc::InvalidSequence: return "InvalidSequence";
    case Errc::MalformedFasta: return "MalformedFasta";
    case Errc::IoError: return "IoError";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::WrongAlignmentKind: return "WrongAlignmentKind";
    case Errc::EmptyReferenceSet: return "EmptyReferenceSet";
    case Errc::UnknownReferenceId: return "UnknownReferenceId";
    case Errc::ActiveSitePositionOutOfRange: return "ActiveSitePositionOutOfRange";
    case Errc::UnannotatedRecord: return "UnannotatedRecord";
    case Errc::MissingScore: return "MissingScore";
    case Errc::NonNumericScore: return "NonNumericScore";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::ScoreOutOfRange: return "ScoreOutOfRange";
    case Errc::TooManyMutationsForProtectedSet: return "TooManyMutationsForProtectedSet";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::OrientationMismatch: return "OrientationMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ManifestMismatch: return "ManifestMismatch";
    }
    return "Unknown";
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
    for (int c = 0; c <= static_cast<int>(Errc::ManifestMismatch); ++c) {
        if (name == errc_name(static_cast<Errc>(c))) {
            return static_cast<Errc>(c);
        }
    }
    return std::nullopt;
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace plmc
