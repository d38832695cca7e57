#include "prct/harness/rate_limiter.hpp"

#include <algorithm>

namespace prct {

double TokenBucket::available(double now) {
    if (last_refill_ < 0) last_refill_ = now;
    tokens_ = std::min(capacity_, tokens_ + (now - last_refill_) * refill_per_sec_);
    last_refill_ = now;
    return tokens_;
}

double TokenBucket::acquire(Clock& clock) {
    double now = clock.now();
    double have = available(now);
    if (have >= 1.0) {
        tokens_ = have - 1.0;
        return now;
    }
    double wait = (1.0 - have) / refill_per_sec_;
    clock.sleep_for(wait);
    double permitted_at = clock.now();
    available(permitted_at);
    tokens_ -= 1.0;
    if (tokens_ < 0.0) tokens_ = 0.0;
    return permitted_at;
}

} // namespace prct
