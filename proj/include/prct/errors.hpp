#pragma once

#include <stdexcept>
#include <string>

namespace prct {

// Base class for all toolkit errors. Subcommands map these to exit code 2
// unless a more specific contract applies.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable or malformed input artifact (raw records, corpus, allocation).
struct IngestError : Error {
    using Error::Error;
};

// A structurally broken experiment log: an unparseable non-trailing line.
struct CorruptLogError : Error {
    CorruptLogError(const std::string& msg, std::size_t line)
        : Error(msg), line_number(line) {}
    std::size_t line_number;
};

// Operation called on input it cannot define a result for (empty text,
// zero-norm vector, zero baseline).
struct DegenerateInputError : Error {
    using Error::Error;
};

// A statistical procedure lacks the sample size or variance it requires.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Configuration file rejected; carries the offending field path.
struct ConfigError : Error {
    ConfigError(const std::string& msg, std::string field_path)
        : Error(msg), field(std::move(field_path)) {}
    std::string field;
};

// rerandomize_until_balanced exhausted its attempt budget.
struct NoBalancedAllocationError : Error {
    using Error::Error;
};

} // namespace prct
