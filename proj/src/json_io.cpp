#include "imdpv/json_io.hpp"

#include <fstream>

namespace imdpv {

using nlohmann::json;

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const json& j, const std::string& where) {
    if (!j.is_array())
        throw InputError(where + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw InputError(where + ": expected an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json to_json(const Grid& grid) {
    return {{"lower", to_json(grid.lower())},
            {"upper", to_json(grid.upper())},
            {"width", to_json(grid.widths())}};
}

Grid grid_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("lower") || !j.contains("upper") || !j.contains("width"))
        throw InputError(where + ": grid needs lower, upper and width");
    return Grid(vector_from_json(j["lower"], where), vector_from_json(j["upper"], where),
                vector_from_json(j["width"], where));
}

std::vector<json> read_json_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed JSON (" +
                             e.what() + ")");
        }
    }
    return out;
}

} // namespace imdpv
