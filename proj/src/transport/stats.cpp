#include "qmpc/transport/stats.hpp"

#include <sstream>

namespace qmpc {

std::string StatsSnapshot::report() const {
    std::ostringstream os;
    for (int p = 0; p < 2; ++p) {
        const char* pn = phase_name(Phase(p));
        for (int f = 0; f < 3; ++f)
            for (int t = 0; t < 3; ++t) {
                if (f == t) continue;
                os << "bytes_" << pn << "_" << f << "_" << t << "=" << bytes[p][f][t] << "\n";
            }
        for (int f = 0; f < 3; ++f)
            for (int t = 0; t < 3; ++t) {
                if (f == t) continue;
                os << "msgs_" << pn << "_" << f << "_" << t << "=" << msgs[p][f][t] << "\n";
            }
        os << "header_" << pn << "=" << header_bytes[p] << "\n";
        os << "rounds_" << pn << "=" << rounds[p] << "\n";
        os << "opened_" << pn << "=" << opened[p] << "\n";
    }
    return os.str();
}

StatsSnapshot StatsSnapshot::parse_report(const std::string& text) {
    StatsSnapshot s;
    std::istringstream is(text);
    std::string line;
    auto phase_of = [](const std::string& k, std::size_t pos) {
        return k.compare(pos, 7, "offline") == 0 ? 0 : 1;
    };
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        u64 val = 0;
        try {
            val = std::stoull(line.substr(eq + 1));
        } catch (...) {
            continue;
        }
        if (key.rfind("bytes_", 0) == 0 || key.rfind("msgs_", 0) == 0) {
            bool is_bytes = key.rfind("bytes_", 0) == 0;
            std::size_t base = is_bytes ? 6 : 5;
            int p = phase_of(key, base);
            std::size_t tail = key.size();
            int to = key[tail - 1] - '0';
            int from = key[tail - 3] - '0';
            if (from < 0 || from > 2 || to < 0 || to > 2) continue;
            (is_bytes ? s.bytes : s.msgs)[p][from][to] = val;
        } else if (key.rfind("header_", 0) == 0) {
            s.header_bytes[phase_of(key, 7)] = val;
        } else if (key.rfind("rounds_", 0) == 0) {
            s.rounds[phase_of(key, 7)] = val;
        } else if (key.rfind("opened_", 0) == 0) {
            s.opened[phase_of(key, 7)] = val;
        }
    }
    return s;
}

}  // namespace qmpc
