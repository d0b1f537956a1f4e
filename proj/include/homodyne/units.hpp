#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace homodyne {

/// 10*log10(v), for noise variances in shot-noise units.
inline double db_from_variance(double v) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::domain_error("db_from_variance: variance must be finite and > 0, got " +
                                std::to_string(v));
    return 10.0 * std::log10(v);
}

inline double variance_from_db(double db) {
    if (!std::isfinite(db))
        throw std::domain_error("variance_from_db: non-finite input");
    return std::pow(10.0, db / 10.0);
}

inline double dbm_to_watts(double dbm) {
    if (!std::isfinite(dbm))
        throw std::domain_error("dbm_to_watts: non-finite input");
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double watts_to_dbm(double watts) {
    if (!(watts > 0.0) || !std::isfinite(watts))
        throw std::domain_error("watts_to_dbm: power must be finite and > 0, got " +
                                std::to_string(watts));
    return 10.0 * std::log10(watts) + 30.0;
}

}  // namespace homodyne
