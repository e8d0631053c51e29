#include "byzsgd/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace byzsgd {

namespace {
constexpr const char* kHeader =
    "step,phase,server_id,loss,grad_norm,delta,max_pairwise,filter_rejects,pulls";
}

void emit_csv(const MetricsTrace& trace, const std::string& path) {
    if (trace.empty()) throw std::invalid_argument("emit_csv: empty trace");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    std::fprintf(f, "%s\n", kHeader);
    for (const MetricsRecord& r : trace) {
        std::fprintf(f, "%ld,%s,%d,%.17g,%.17g,%.17g,%.17g,%ld,%ld\n", r.step,
                     r.phase == PhaseTag::gather ? "gather" : "scatter", r.server_id, r.loss,
                     r.grad_norm, r.delta, r.max_pairwise, r.filter_rejects, r.pulls);
    }
    if (std::fclose(f) != 0) throw std::runtime_error("emit_csv: write failed for " + path);
}

MetricsTrace parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw std::runtime_error("parse_csv: bad header in " + path);
    MetricsTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        MetricsRecord r;
        auto next = [&]() {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("parse_csv: short row");
            return tok;
        };
        r.step = std::stol(next());
        const std::string phase = next();
        if (phase == "gather") r.phase = PhaseTag::gather;
        else if (phase == "scatter") r.phase = PhaseTag::scatter;
        else throw std::runtime_error("parse_csv: bad phase '" + phase + "'");
        r.server_id = std::stoi(next());
        r.loss = std::stod(next());
        r.grad_norm = std::stod(next());
        r.delta = std::stod(next());
        r.max_pairwise = std::stod(next());
        r.filter_rejects = std::stol(next());
        r.pulls = std::stol(next());
        trace.push_back(r);
    }
    return trace;
}

}  // namespace byzsgd
