#pragma once

#include <stdexcept>
#include <string>

namespace sparselab {

enum class Errc {
    NonFiniteState,
    NonFiniteLoss,
    NonFiniteScore,
    ShapeMismatch,
    EmptyLayer,
    MissingCheckpoint,
    ConfigError,
    LedgerMismatch,
    BadMagic,
    TruncatedFile,
    CountMismatch,
    IoError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NonFiniteState: return "NonFiniteState";
        case Errc::NonFiniteLoss: return "NonFiniteLoss";
        case Errc::NonFiniteScore: return "NonFiniteScore";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::EmptyLayer: return "EmptyLayer";
        case Errc::MissingCheckpoint: return "MissingCheckpoint";
        case Errc::ConfigError: return "ConfigError";
        case Errc::LedgerMismatch: return "LedgerMismatch";
        case Errc::BadMagic: return "BadMagic";
        case Errc::TruncatedFile: return "TruncatedFile";
        case Errc::CountMismatch: return "CountMismatch";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the whole library; `code()` is stable and
/// machine-readable, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

}  // namespace sparselab
