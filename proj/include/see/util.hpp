#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace see {

// Error taxonomy. ConfigError maps to CLI exit 1, BackendError to 2,
// InvariantError to 3; everything else is a caller contract violation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Unknown id / missing registration.
class LookupError : public Error {
public:
    using Error::Error;
};

// Precondition violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// Failure reported by a generator or verifier backend. Carries enough
// context to retry the single (prompt, seed) work item.
class BackendError : public Error {
public:
    BackendError(const std::string& what, std::string prompt_id = {}, long seed = -1)
        : Error(what), prompt_id(std::move(prompt_id)), seed(seed) {}

    std::string prompt_id;
    long seed = -1;
};

class InvariantError : public Error {
public:
    using Error::Error;
};

// Lowercase slug: alnum kept, whitespace runs collapse to '-', everything
// else dropped. "wine glass" -> "wine-glass".
std::string slugify(std::string_view text);

std::string to_lower(std::string_view text);

std::vector<std::string> split_words(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view text, std::string_view prefix);

// FNV-1a, used for content digests in manifests and model ids.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// splitmix64 step; the workhorse behind all derived deterministic draws.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic draw in [0, 1) keyed by the concatenation of the parts.
// Order-independent call sites get reproducible, fold-order-free decisions.
double keyed_uniform(std::uint64_t seed, std::string_view a, std::string_view b);

// Fixed-precision decimal formatting (no std::format on this toolchain).
std::string fmt_fixed(double value, int decimals);

std::string now_iso8601_utc();

}  // namespace see
