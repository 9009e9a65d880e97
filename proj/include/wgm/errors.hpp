#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wgm {

enum class ErrorCode {
    NegativeRate,
    EpsilonWithScattering,
    ZeroTotalKappa,
    RadialFactorOutOfRange,
    NonFinite,
    DimensionOverflow,
    IndexOutOfRange,
    NonHermitianConstruction,
    SingularGenerator,
    NonPhysicalResult,
    DegenerateResponse,
    ZeroKappaEx,
    VanishingDenominator,
    UnsupportedBackend,
    InvalidAxis,
    UnsatisfiableSpec,
    UnknownKey,
    BadValue,
    IoFailure,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::EpsilonWithScattering: return "EpsilonWithScattering";
    case ErrorCode::ZeroTotalKappa: return "ZeroTotalKappa";
    case ErrorCode::RadialFactorOutOfRange: return "RadialFactorOutOfRange";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonHermitianConstruction: return "NonHermitianConstruction";
    case ErrorCode::SingularGenerator: return "SingularGenerator";
    case ErrorCode::NonPhysicalResult: return "NonPhysicalResult";
    case ErrorCode::DegenerateResponse: return "DegenerateResponse";
    case ErrorCode::ZeroKappaEx: return "ZeroKappaEx";
    case ErrorCode::VanishingDenominator: return "VanishingDenominator";
    case ErrorCode::UnsupportedBackend: return "UnsupportedBackend";
    case ErrorCode::InvalidAxis: return "InvalidAxis";
    case ErrorCode::UnsatisfiableSpec: return "UnsatisfiableSpec";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// Description without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace wgm
