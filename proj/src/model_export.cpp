#include "imdpv/model_export.hpp"

#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace imdpv {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string label_expr(const std::vector<Index>& tiles) {
    if (tiles.empty())
        return "false";
    std::string out;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        if (i)
            out += " | ";
        out += "s=" + std::to_string(tiles[i]);
    }
    return out;
}

std::string prop_label(const std::string& label) {
    if (!label.empty() && label[0] == '!')
        return "!\"" + label.substr(1) + "\"";
    return "\"" + label + "\"";
}

} // namespace

ExportReport export_prism(const Imdp& imdp, const BoundedProperty& property,
                          const std::vector<Index>& initial_tiles,
                          const std::filesystem::path& model_path,
                          const std::filesystem::path& property_path) {
    const Index num_tiles = imdp.state_grid.num_tiles();
    const Index num_bins = imdp.num_estimate_bins();
    std::set<Index> absorbing;
    for (Index s : target_states(imdp, property))
        absorbing.insert(s);
    for (Index s : unsafe_states(imdp, property))
        absorbing.insert(s);
    const Index init = initial_tiles.empty() ? 0 : initial_tiles.front();

    std::ofstream out(model_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + model_path.string());
    ExportReport rep;
    out << "// s: state tile (flat index), e: estimate bin, -1 until drawn\n";
    out << "imdp\n\n";
    out << "module abstraction\n";
    out << "  s : [0.." << num_tiles - 1 << "] init " << init << ";\n";
    out << "  e : [-1.." << num_bins - 1 << "] init -1;\n\n";

    std::set<Index> referenced(initial_tiles.begin(), initial_tiles.end());
    std::set<Index> commanded;
    for (const auto& [s, row] : imdp.successors) {
        if (absorbing.count(s))
            continue;
        const IntervalRow* delta = imdp.delta.find(s);
        if (!delta)
            continue;
        commanded.insert(s);
        out << "  [] s=" << s << " & e=-1 ->";
        bool first = true;
        for (Index e = 0; e < num_bins; ++e) {
            if (delta->hi[e] <= 0.0 || row[std::size_t(e)].empty())
                continue;
            out << (first ? " " : " + ") << "[" << num(delta->lo[e]) << "," << num(delta->hi[e])
                << "]:(e'=" << e << ")";
            first = false;
            ++rep.branches;
        }
        out << ";\n";
        ++rep.commands;
        for (Index e = 0; e < num_bins; ++e)
            for (Index t : row[std::size_t(e)]) {
                out << "  [] s=" << s << " & e=" << e << " -> 1:(s'=" << t << ") & (e'=-1);\n";
                referenced.insert(t);
                ++rep.commands;
                ++rep.branches;
            }
    }
    for (Index s : referenced)
        if (!commanded.count(s)) {
            out << "  [] s=" << s << " & e=-1 -> 1:(s'=" << s << ");\n";
            ++rep.commands;
            ++rep.branches;
        }
    out << "endmodule\n\n";
    for (const auto& [name, tiles] : imdp.labels)
        out << "label \"" << name << "\" = " << label_expr(tiles) << ";\n";
    referenced.insert(commanded.begin(), commanded.end());
    rep.states = Index(referenced.size());
    if (!out)
        throw InputError("write failed for " + model_path.string());

    std::ofstream props(property_path, std::ios::binary | std::ios::trunc);
    if (!props)
        throw InputError("cannot write " + property_path.string());
    const Index steps = 2 * property.horizon;
    if (property.kind == BoundedProperty::Kind::until)
        props << "Pmin=? [ " << prop_label(property.safe_label) << " U<=" << steps << " "
              << prop_label(property.target_label) << " ]\n";
    else
        props << "Pmin=? [ F<=" << steps << " " << prop_label(property.target_label) << " ]\n";
    return rep;
}

PrismModel parse_prism(const std::filesystem::path& model_path) {
    std::ifstream in(model_path);
    if (!in)
        throw InputError("cannot open " + model_path.string());
    static const std::regex range_s(R"(^\s*s : \[0\.\.(\d+)\] init (\d+);)");
    static const std::regex range_e(R"(^\s*e : \[-1\.\.(\d+)\] init -1;)");
    static const std::regex draw(R"(^\s*\[\] s=(\d+) & e=-1 -> (.*);$)");
    static const std::regex pick(R"(^\s*\[\] s=(\d+) & e=(\d+) -> 1:\(s'=(\d+)\) & \(e'=-1\);$)");
    static const std::regex branch(R"(\[([^,\]]+),([^\]]+)\]:\(e'=(\d+)\))");
    static const std::regex label(R"re(^label "([^"]+)" = (.*);$)re");
    static const std::regex atom(R"(s=(\d+))");

    PrismModel m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::smatch g;
        if (std::regex_search(line, g, range_s)) {
            m.num_tiles = std::stoll(g[1]) + 1;
            m.initial_tile = std::stoll(g[2]);
        } else if (std::regex_search(line, g, range_e)) {
            m.num_estimate_bins = std::stoll(g[1]) + 1;
        } else if (std::regex_match(line, g, draw)) {
            const Index s = std::stoll(g[1]);
            const std::string body = g[2];
            if (body.rfind("1:(s'=", 0) == 0)
                continue; // self-loop of an absorbing tile
            IntervalRow row;
            row.lo = Eigen::VectorXd::Zero(m.num_estimate_bins);
            row.hi = Eigen::VectorXd::Zero(m.num_estimate_bins);
            for (std::sregex_iterator it(body.begin(), body.end(), branch), end; it != end; ++it) {
                const Index e = std::stoll((*it)[3]);
                if (e < 0 || e >= m.num_estimate_bins)
                    throw InputError(model_path.string() + ":" + std::to_string(line_no) +
                                     ": estimate bin out of range");
                row.lo[e] = std::stod((*it)[1]);
                row.hi[e] = std::stod((*it)[2]);
            }
            m.intervals[s] = std::move(row);
        } else if (std::regex_match(line, g, pick)) {
            const Index s = std::stoll(g[1]);
            const Index e = std::stoll(g[2]);
            auto& row = m.successors[s];
            row.resize(std::size_t(m.num_estimate_bins));
            row.at(std::size_t(e)).push_back(std::stoll(g[3]));
        } else if (std::regex_match(line, g, label)) {
            std::vector<Index> tiles;
            const std::string expr = g[2];
            for (std::sregex_iterator it(expr.begin(), expr.end(), atom), end; it != end; ++it)
                tiles.push_back(std::stoll((*it)[1]));
            m.labels[g[1]] = std::move(tiles);
        }
    }
    if (m.num_tiles == 0 || m.num_estimate_bins == 0)
        throw InputError(model_path.string() + ": missing variable declarations");
    return m;
}

} // namespace imdpv
