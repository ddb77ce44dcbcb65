#include "shared_interest/config.hpp"

#include "shared_interest/error.hpp"

namespace si {

void AppConfig::validate() const {
  if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be >= 0");
  if (port < 0 || port > 65535) throw Error(ErrorCode::invalid_argument, "port must be in [0, 65535]");
  if (threads == 0) throw Error(ErrorCode::invalid_argument, "threads must be >= 1");
  rule.validate();
  thresholds.validate();
}

}  // namespace si
