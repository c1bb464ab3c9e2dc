#pragma once

#include <stdexcept>
#include <string>

namespace decoy {

/// Process exit codes shared by every CLI subcommand.
enum class exit_code : int {
    ok = 0,
    usage = 2,
    backend = 3,
    internal = 4,
};

/// Bad input: malformed files, unknown labels, duplicate ids, empty groups.
class input_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Completion backend failure (network, auth, replay cache miss).
class backend_error : public std::runtime_error {
  public:
    backend_error(const std::string& what, int status = 0)
        : std::runtime_error(what), status_(status) {}

    [[nodiscard]] int status() const noexcept { return status_; }

  private:
    int status_;
};

class cache_miss_error : public backend_error {
  public:
    explicit cache_miss_error(const std::string& key)
        : backend_error("replay cache miss for request " + key, 0), key_(key) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// A contract the library itself should have upheld was violated.
class invariant_error : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

}  // namespace decoy
