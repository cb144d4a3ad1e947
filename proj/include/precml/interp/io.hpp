#pragma once

#include "precml/interp/delaunay.hpp"
#include "precml/interp/spline.hpp"

#include "json.hpp"

#include <vector>

namespace precml {

inline nlohmann::json to_json(const Triangulation& tri) {
    nlohmann::json j;
    j["dim"] = tri.dim;
    auto& verts = j["vertices"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < tri.vertices.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index k = 0; k < tri.vertices.cols(); ++k) row.push_back(tri.vertices(i, k));
        verts.push_back(row);
    }
    j["values"] = std::vector<double>(tri.values.data(), tri.values.data() + tri.values.size());
    auto& simp = j["simplices"] = nlohmann::json::array();
    for (const auto& s : tri.simplices) simp.push_back(std::vector<int>(s.begin(), s.begin() + tri.dim + 1));
    return j;
}

inline nlohmann::json to_json(const Spline1D& sp) {
    return {{"order", sp.order}, {"knots", sp.knots}, {"coefficients", sp.coefficients}};
}

inline nlohmann::json to_json(const GridSpline& sp) {
    return {{"dim", sp.dim}, {"axes", sp.axes}, {"knots", sp.knots}, {"coefficients", sp.coefficients}};
}

} // namespace precml
