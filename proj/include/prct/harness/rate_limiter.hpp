#pragma once

#include "prct/harness/clock.hpp"

namespace prct {

// Token bucket: `capacity` permits, refilled at `refill_per_sec`. A full
// bucket allows an initial burst; steady state is one permit per refill
// interval.
class TokenBucket {
public:
    explicit TokenBucket(double capacity = 60.0, double refill_per_sec = 1.0)
        : capacity_(capacity), refill_per_sec_(refill_per_sec), tokens_(capacity) {}

    // Sleeps on `clock` until a permit is available and consumes it;
    // returns the timestamp at which the call was permitted.
    double acquire(Clock& clock);

    double available(double now);

private:
    double capacity_;
    double refill_per_sec_;
    double tokens_;
    double last_refill_ = -1.0;
};

} // namespace prct
