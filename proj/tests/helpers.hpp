#pragma once

#include <cmath>
#include <cstddef>

#include "hdlpboot/matrix.hpp"

namespace testutil {

inline hdlpboot::Matrix make_equicorr(std::size_t d, double rho) {
    hdlpboot::Matrix s(d, d, rho);
    for (std::size_t i = 0; i < d; ++i) s(i, i) = 1.0;
    return s;
}

inline hdlpboot::Matrix make_toeplitz(std::size_t d, double rho) {
    hdlpboot::Matrix s(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            s(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
    return s;
}

inline double mean_of(const hdlpboot::Vector& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double var_of(const hdlpboot::Vector& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace testutil
