#pragma once

// Parameter sweeps over one or two PhysicalParams fields. Each grid cell is
// solved independently on a worker pool; failures are captured per cell.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "wgm/ae_solver.hpp"
#include "wgm/config.hpp"
#include "wgm/errors.hpp"
#include "wgm/observables.hpp"
#include "wgm/params.hpp"
#include "wgm/th_solver.hpp"

namespace wgm {

inline constexpr std::string_view kCodeVersion = "1.0.0";

enum class Method { TH, AE, BOTH, NO_ATOM };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::TH: return "TH";
    case Method::AE: return "AE";
    case Method::BOTH: return "BOTH";
    case Method::NO_ATOM: return "NO_ATOM";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    std::string up(s);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "TH") return Method::TH;
    if (up == "AE") return Method::AE;
    if (up == "BOTH") return Method::BOTH;
    if (up == "NO_ATOM") return Method::NO_ATOM;
    throw Error(ErrorCode::BadValue, "unknown method '" + std::string(s) + "'");
}

enum class Observable { F_a1, F_b1, F_a2, F_b2, P1, P2, P3, g2_a1a1, g2_a2a2, g2_a1a2 };

inline constexpr std::array<Observable, 10> kAllObservables{
    Observable::F_a1, Observable::F_b1, Observable::F_a2, Observable::F_b2, Observable::P1,
    Observable::P2,   Observable::P3,   Observable::g2_a1a1, Observable::g2_a2a2, Observable::g2_a1a2};

inline const char* observable_name(Observable o) {
    switch (o) {
    case Observable::F_a1: return "F_a1";
    case Observable::F_b1: return "F_b1";
    case Observable::F_a2: return "F_a2";
    case Observable::F_b2: return "F_b2";
    case Observable::P1: return "P1";
    case Observable::P2: return "P2";
    case Observable::P3: return "P3";
    case Observable::g2_a1a1: return "g2_a1a1";
    case Observable::g2_a2a2: return "g2_a2a2";
    case Observable::g2_a1a2: return "g2_a1a2";
    }
    return "?";
}

inline Observable parse_observable(std::string_view s) {
    for (Observable o : kAllObservables)
        if (s == observable_name(o)) return o;
    throw Error(ErrorCode::BadValue, "unknown observable '" + std::string(s) + "'");
}

inline bool is_g2(Observable o) {
    return o == Observable::g2_a1a1 || o == Observable::g2_a2a2 || o == Observable::g2_a1a2;
}

struct Axis {
    std::string name;
    double min = 0.0, max = 0.0, step = 1.0;

    /// Grid points min + k*step up to max (inclusive within 1e-9 step).
    std::vector<double> values() const {
        std::vector<double> v;
        if (!(step > 0.0) || !(max >= min)) return v;
        const auto n = static_cast<long long>(std::floor((max - min) / step + 1e-9)) + 1;
        v.reserve(static_cast<std::size_t>(n));
        for (long long k = 0; k < n; ++k) v.push_back(min + static_cast<double>(k) * step);
        return v;
    }
};

/// "name:min:max:step"
inline Axis parse_axis(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = text.find(':', start);
        parts.emplace_back(text.substr(start, colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 4)
        throw Error(ErrorCode::InvalidAxis, "axis '" + std::string(text) + "' must be name:min:max:step");
    return {parts[0], detail::parse_double("axis min", parts[1]), detail::parse_double("axis max", parts[2]),
            detail::parse_double("axis step", parts[3])};
}

struct ScanSpec {
    Method method = Method::TH;
    std::vector<Axis> axes;
    PhysicalParams base;
    std::string preset = "none";
    std::vector<Observable> observables{Observable::F_a1, Observable::F_b1, Observable::F_a2,
                                        Observable::F_b2, Observable::P1,   Observable::P2,
                                        Observable::P3};
    ThOptions th;
    unsigned workers = 0;   // 0: hardware concurrency
};

/// Throws InvalidAxis or UnsatisfiableSpec.
inline void check_spec(const ScanSpec& spec) {
    if (spec.axes.empty() || spec.axes.size() > 2)
        throw Error(ErrorCode::InvalidAxis, "a scan needs one or two axes");
    for (const auto& a : spec.axes) {
        if (!is_real_field(a.name))
            throw Error(ErrorCode::InvalidAxis, "'" + a.name + "' is not a numeric parameter");
        if (!(a.step > 0.0)) throw Error(ErrorCode::InvalidAxis, "axis '" + a.name + "' needs step > 0");
        if (!std::isfinite(a.min) || !std::isfinite(a.max))
            throw Error(ErrorCode::InvalidAxis, "axis '" + a.name + "' bounds must be finite");
        if (a.values().empty())
            throw Error(ErrorCode::UnsatisfiableSpec, "axis '" + a.name + "' has no points");
    }
    if (spec.axes.size() == 2 && spec.axes[0].name == spec.axes[1].name)
        throw Error(ErrorCode::InvalidAxis, "both axes scan '" + spec.axes[0].name + "'");
    const bool has_ae = spec.method == Method::AE || spec.method == Method::BOTH;
    for (Observable o : spec.observables)
        if (is_g2(o) && !has_ae)
            throw Error(ErrorCode::UnsatisfiableSpec,
                        std::string(observable_name(o)) +
                            " needs the AE method: one photon per mode cannot represent two-photon correlations");
}

struct CellError {
    ErrorCode code;
    std::string message;
};

struct ScanRow {
    std::vector<double> axis;
    std::vector<double> values;
    double residual = std::numeric_limits<double>::quiet_NaN();
    std::optional<CellError> error;
    std::vector<std::string> warnings;
};

struct ResultTable {
    std::string preset;
    Method method = Method::TH;
    std::vector<Axis> axes;
    std::vector<std::string> columns;
    std::vector<ScanRow> rows;
    std::string timestamp;
    std::string version{kCodeVersion};
    double elapsed_seconds = 0.0;

    std::size_t error_count() const {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const ScanRow& r) { return r.error.has_value(); }));
    }
    double max_residual() const {
        double m = 0.0;
        for (const auto& r : rows)
            if (std::isfinite(r.residual)) m = std::max(m, r.residual);
        return m;
    }
    int column_index(std::string_view name) const {
        for (std::size_t k = 0; k < columns.size(); ++k)
            if (columns[k] == name) return static_cast<int>(k);
        return -1;
    }
};

inline std::vector<std::string> scan_columns(const ScanSpec& spec) {
    std::vector<std::string> cols;
    for (Observable o : spec.observables) {
        const std::string n = observable_name(o);
        if (spec.method == Method::BOTH) {
            if (!is_g2(o)) cols.push_back(n + "_th");
            cols.push_back(n + "_ae");
        } else {
            cols.push_back(n);
        }
    }
    return cols;
}

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::optional<OutputMode> flux_mode(Observable o) {
    switch (o) {
    case Observable::F_a1: return OutputMode::a1;
    case Observable::F_b1: return OutputMode::b1;
    case Observable::F_a2: return OutputMode::a2;
    case Observable::F_b2: return OutputMode::b2;
    default: return std::nullopt;
    }
}

inline std::optional<int> population_index(Observable o) {
    switch (o) {
    case Observable::P1: return 0;
    case Observable::P2: return 1;
    case Observable::P3: return 2;
    default: return std::nullopt;
    }
}

struct MethodValues {
    std::vector<double> values;
    double residual = 0.0;
    std::vector<std::string> warnings;
};

inline MethodValues evaluate_th(const ValidatedParams& vp, const ScanSpec& spec) {
    const ThResult r = solve_th(vp, spec.th);
    MethodValues out{{}, r.state.residual, r.state.warnings};
    for (Observable o : spec.observables) {
        if (auto m = flux_mode(o)) out.values.push_back(flux_th(r, vp, *m));
        else if (auto k = population_index(o)) out.values.push_back(r.populations[*k]);
    }
    return out;
}

inline MethodValues evaluate_ae(const ValidatedParams& vp, const ScanSpec& spec) {
    const AeResult r = solve_ae(vp);
    const OutputCoefficients c = output_coefficients(vp, mode_couplings(vp));
    MethodValues out{{}, r.state.residual, r.constants.warnings};
    for (const auto& w : r.state.warnings) out.warnings.push_back(w);
    for (Observable o : spec.observables) {
        if (auto m = flux_mode(o)) {
            out.values.push_back(flux_ae(r.state, c, vp, *m));
        } else if (auto k = population_index(o)) {
            out.values.push_back(r.state.populations[*k]);
        } else {
            const auto [mi, mj] = o == Observable::g2_a1a1   ? std::pair{OutputMode::a1, OutputMode::a1}
                                  : o == Observable::g2_a2a2 ? std::pair{OutputMode::a2, OutputMode::a2}
                                                             : std::pair{OutputMode::a1, OutputMode::a2};
            out.values.push_back(g2(r.state, c, mi, mj).value);
        }
    }
    return out;
}

inline MethodValues evaluate_no_atom(const ValidatedParams& vp, const ScanSpec& spec) {
    MethodValues out;
    for (Observable o : spec.observables) {
        if (auto m = flux_mode(o)) out.values.push_back(flux_no_atom(vp, *m));
        else out.values.push_back(kNaN);
    }
    return out;
}

} // namespace detail

/// Solve one grid cell; errors are recorded in the row.
inline ScanRow evaluate_cell(const ScanSpec& spec, const PhysicalParams& params, std::vector<double> axis) {
    ScanRow row;
    row.axis = std::move(axis);
    try {
        const ValidatedParams vp = validate(params);
        switch (spec.method) {
        case Method::TH: {
            auto v = detail::evaluate_th(vp, spec);
            row.values = std::move(v.values);
            row.residual = v.residual;
            row.warnings = std::move(v.warnings);
            break;
        }
        case Method::AE: {
            auto v = detail::evaluate_ae(vp, spec);
            row.values = std::move(v.values);
            row.residual = v.residual;
            row.warnings = std::move(v.warnings);
            break;
        }
        case Method::NO_ATOM: {
            auto v = detail::evaluate_no_atom(vp, spec);
            row.values = std::move(v.values);
            row.residual = 0.0;
            break;
        }
        case Method::BOTH: {
            ScanSpec th_spec = spec;
            th_spec.observables.clear();
            for (Observable o : spec.observables)
                if (!is_g2(o)) th_spec.observables.push_back(o);
            const auto th = detail::evaluate_th(vp, th_spec);
            const auto ae = detail::evaluate_ae(vp, spec);
            std::size_t ti = 0;
            for (std::size_t k = 0; k < spec.observables.size(); ++k) {
                if (!is_g2(spec.observables[k])) row.values.push_back(th.values[ti++]);
                row.values.push_back(ae.values[k]);
            }
            row.residual = std::max(th.residual, ae.residual);
            row.warnings = th.warnings;
            row.warnings.insert(row.warnings.end(), ae.warnings.begin(), ae.warnings.end());
            break;
        }
        }
    } catch (const Error& e) {
        row.values.assign(scan_columns(spec).size(), detail::kNaN);
        row.residual = detail::kNaN;
        row.error = CellError{e.code(), e.message()};
    }
    return row;
}

inline std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Rows are ordered with the first axis outermost; output does not depend on the worker count.
inline ResultTable run_scan(const ScanSpec& spec, const ProgressCallback& progress = {}) {
    check_spec(spec);
    const auto start = std::chrono::steady_clock::now();

    ResultTable table;
    table.preset = spec.preset;
    table.method = spec.method;
    table.axes = spec.axes;
    table.columns = scan_columns(spec);
    table.timestamp = utc_timestamp();

    const std::vector<double> xs = spec.axes[0].values();
    const std::vector<double> ys = spec.axes.size() > 1 ? spec.axes[1].values() : std::vector<double>{0.0};
    const std::size_t total = xs.size() * ys.size();
    table.rows.resize(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto work = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            const std::size_t ix = k / ys.size(), iy = k % ys.size();
            PhysicalParams p = spec.base;
            find_field(spec.axes[0].name)->real(p) = xs[ix];
            std::vector<double> axis{xs[ix]};
            if (spec.axes.size() > 1) {
                find_field(spec.axes[1].name)->real(p) = ys[iy];
                axis.push_back(ys[iy]);
            }
            table.rows[k] = evaluate_cell(spec, p, std::move(axis));
            const std::size_t d = ++done;
            if (progress) progress(d, total);
        }
    };
    unsigned n_workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, total));
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
    }
    table.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return table;
}

} // namespace wgm
