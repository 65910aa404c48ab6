#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace plmc {

enum class Errc {
    LengthNotMultipleOfThree,
    InternalStopCodon,
    EmptyTranslation,
    InvalidSequence,
    MalformedFasta,
    IoError,
    DuplicateId,
    EmptySequence,
    WrongAlignmentKind,
    EmptyReferenceSet,
    UnknownReferenceId,
    ActiveSitePositionOutOfRange,
    UnannotatedRecord,
    MissingScore,
    NonNumericScore,
    EmptyTable,
    ScoreOutOfRange,
    TooManyMutationsForProtectedSet,
    InvalidParameter,
    OrientationMismatch,
    InvalidConfig,
    ManifestMismatch,
};

const char* errc_name(Errc code) noexcept;
/// Inverse of errc_name; nullopt for an unknown name.
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    Errc code_;
    std::string message_;
};

}  // namespace plmc
