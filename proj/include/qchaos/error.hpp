#ifndef QCHAOS_ERROR_HPP
#define QCHAOS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qchaos {

/// Invalid input: violated precondition, malformed config, bad domain.
class config_error : public std::invalid_argument {
public:
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical stage failed (quadrature non-convergence, escape, truncation leak).
/// `stage()` names the pipeline step so the CLI can report it.
class numerical_error : public std::runtime_error {
public:
  numerical_error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

}  // namespace detail
}  // namespace qchaos

#endif
