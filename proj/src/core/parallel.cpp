#include "thincount/parallel.hpp"

#include <cstdlib>
#include <string>

namespace thincount {

std::size_t worker_count()
{
    if (char const* env = std::getenv("THINCOUNT_THREADS")) {
        try {
            long const requested = std::stol(env);
            if (requested > 0) return static_cast<std::size_t>(requested);
        } catch (std::exception const&) {
            // Unparseable values fall through to the default.
        }
    }
    unsigned const hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace thincount
