#include "prct/harness/clock.hpp"

#include <chrono>
#include <thread>

namespace prct {

double SystemClock::now() {
    auto t = std::chrono::system_clock::now().time_since_epoch();
    return std::chrono::duration<double>(t).count();
}

void SystemClock::sleep_for(double seconds) {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

} // namespace prct
