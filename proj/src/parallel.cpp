#include "poison_scan/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace poison_scan {

std::size_t resolve_threads(std::optional<std::size_t> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("POISON_SCAN_THREADS")) {
        std::string_view text(env);
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc{} && ptr == text.data() + text.size() && value > 0) return value;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace poison_scan
