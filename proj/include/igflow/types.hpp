#pragma once

#include <functional>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "igflow/errors.hpp"

namespace igflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vec&)>;
using CovectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

enum class Chart { Theta, Eta };

inline std::string_view to_string(Chart c) {
    return c == Chart::Theta ? "theta" : "eta";
}

/// A coordinate tuple together with the chart it is expressed in.
struct Point {
    Chart chart = Chart::Theta;
    Vec coords;

    static Point theta(Vec x) { return {Chart::Theta, std::move(x)}; }
    static Point eta(Vec x) { return {Chart::Eta, std::move(x)}; }

    int dim() const { return static_cast<int>(coords.size()); }
};

inline void require_chart(const Point& p, Chart expected, std::string_view op) {
    if (p.chart != expected) {
        throw ChartError(std::string(op) + ": expected a " + std::string(to_string(expected)) +
                         "-chart point, got " + std::string(to_string(p.chart)));
    }
}

inline Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

} // namespace igflow
