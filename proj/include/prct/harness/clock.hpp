#pragma once

#include "prct/timefmt.hpp"

namespace prct {

// Time source for the run loop, rate limiter, and retry sleeps. The
// simulated clock advances instantly so desk-scale runs and tests do not
// wait out backoff schedules.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0; // seconds since the Unix epoch
    virtual void sleep_for(double seconds) = 0;
};

class SystemClock final : public Clock {
public:
    double now() override;
    void sleep_for(double seconds) override;
};

class SimClock final : public Clock {
public:
    // Default start keeps simulated trial logs reproducible run to run.
    explicit SimClock(double start_epoch = double(epoch_from_civil(2026, 1, 15)))
        : t_(start_epoch) {}
    double now() override { return t_; }
    void sleep_for(double seconds) override {
        if (seconds > 0) t_ += seconds;
    }

private:
    double t_;
};

} // namespace prct
