#pragma once

#include <cstdint>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace icr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed configuration or incompatible settings (bad specs, dimension
// mismatches between configured components, unparseable config files).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Data that fails catalog or corpus validation. Carries an optional source
// line for file-based input.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what, long line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

// Broken index files: bad magic, unsupported version, checksum mismatch,
// encoder fingerprint mismatch.
class IndexError : public Error {
public:
    using Error::Error;
};

// Failures from embedding or logit providers. Retryable errors are transient
// (timeouts, 5xx); non-retryable ones indicate a contract violation.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable)
        : Error(what), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class NoCandidatesError : public Error {
public:
    using Error::Error;
};

// --- hashing -----------------------------------------------------------

inline constexpr std::uint64_t kFnv64Offset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnv64Prime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnv64Offset) {
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnv64Prime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Token hash used by the feature-hashing embedder: FNV-1a over the token
// bytes mixed with the seed through a splitmix64 finalizer.
constexpr std::uint64_t seeded_token_hash(std::string_view token, std::uint64_t seed) {
    return splitmix64(fnv1a64(token) ^ seed);
}

// Deterministic cross-platform RNG (splitmix64 stream). std::mt19937 would be
// deterministic too, but the distributions on top of it are not portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw Error("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % n;
    }

    // Uniform double in [0, 1).
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return real() < p; }

    // Derive an independent child stream, so adding draws to one phase of a
    // generator does not shift every later phase.
    Rng fork(std::uint64_t salt) { return Rng(splitmix64(state_ ^ salt)); }

private:
    std::uint64_t state_;
};

// --- logging -----------------------------------------------------------

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

inline LogLevel& log_threshold() {
    static LogLevel level = LogLevel::warn;
    return level;
}

inline void log_message(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    static std::mutex mu;
    const char* tag = level == LogLevel::debug  ? "debug"
                      : level == LogLevel::info ? "info"
                      : level == LogLevel::warn ? "warn"
                                                : "error";
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }
inline void log_error(const std::string& msg) { log_message(LogLevel::error, msg); }

}  // namespace icr
