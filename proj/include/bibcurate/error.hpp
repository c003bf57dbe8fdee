#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bibcurate {

enum class Errc {
  // query language
  EmptyQuery,
  UnbalancedParen,
  UnknownField,
  EmptyPhrase,
  MalformedDocsRef,
  MalformedYear,
  DanglingOperator,
  // corpus
  DuplicateBibcode,
  MalformedRecord,
  UnknownLibraryKey,
  NotAHit,
  // library store
  ExclusivityViolation,
  AmbiguousLibraryName,
  InvalidArgument,
  IoFailure,
  CorruptSnapshot,
  // remote
  AuthFailure,
  QuotaExhausted,
  TransientFailure,
  UnknownRemoteLibrary,
  ProtocolError,
  // curation
  MissingExclusions,
  DecisionSourceExhausted,
  InvalidDecision,
  NothingToUndo,
};

inline std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::EmptyQuery: return "EmptyQuery";
    case Errc::UnbalancedParen: return "UnbalancedParen";
    case Errc::UnknownField: return "UnknownField";
    case Errc::EmptyPhrase: return "EmptyPhrase";
    case Errc::MalformedDocsRef: return "MalformedDocsRef";
    case Errc::MalformedYear: return "MalformedYear";
    case Errc::DanglingOperator: return "DanglingOperator";
    case Errc::DuplicateBibcode: return "DuplicateBibcode";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::UnknownLibraryKey: return "UnknownLibraryKey";
    case Errc::NotAHit: return "NotAHit";
    case Errc::ExclusivityViolation: return "ExclusivityViolation";
    case Errc::AmbiguousLibraryName: return "AmbiguousLibraryName";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoFailure: return "IoFailure";
    case Errc::CorruptSnapshot: return "CorruptSnapshot";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::QuotaExhausted: return "QuotaExhausted";
    case Errc::TransientFailure: return "TransientFailure";
    case Errc::UnknownRemoteLibrary: return "UnknownRemoteLibrary";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::MissingExclusions: return "MissingExclusions";
    case Errc::DecisionSourceExhausted: return "DecisionSourceExhausted";
    case Errc::InvalidDecision: return "InvalidDecision";
    case Errc::NothingToUndo: return "NothingToUndo";
  }
  return "Unknown";
}

/// Errors that stem from the environment (files, network, credentials)
/// rather than from what the operator asked for.
inline bool is_environment_error(Errc e) {
  switch (e) {
    case Errc::IoFailure:
    case Errc::CorruptSnapshot:
    case Errc::AuthFailure:
    case Errc::QuotaExhausted:
    case Errc::TransientFailure:
    case Errc::ProtocolError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bibcurate
