#pragma once

// Flat key=value configuration over PhysicalParams. Keys are the field names;
// complex drives accept "re" or "re,im"; '#' starts a comment.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wgm/errors.hpp"
#include "wgm/params.hpp"

namespace wgm {

enum class FieldKind { Real, Complex, Flag };

struct FieldInfo {
    std::string name;
    FieldKind kind;
    std::string description;
    std::function<double&(PhysicalParams&)> real;     // Real
    std::function<cplx&(PhysicalParams&)> complex;    // Complex
    std::function<bool&(PhysicalParams&)> flag;       // Flag
};

inline const std::vector<FieldInfo>& field_registry() {
    static const std::vector<FieldInfo> fields = [] {
        std::vector<FieldInfo> f;
        auto real = [&f](std::string name, std::string desc, double PhysicalParams::*member) {
            f.push_back({std::move(name), FieldKind::Real, std::move(desc),
                         [member](PhysicalParams& p) -> double& { return p.*member; }, {}, {}});
        };
        auto cmplx = [&f](std::string name, std::string desc, cplx PhysicalParams::*member) {
            f.push_back({std::move(name), FieldKind::Complex, std::move(desc), {},
                         [member](PhysicalParams& p) -> cplx& { return p.*member; }, {}});
        };
        real("g0_1", "coupling prefactor, transition 1", &PhysicalParams::g0_1);
        real("g0_2", "coupling prefactor, transition 2", &PhysicalParams::g0_2);
        real("h1", "intra-pair backscattering, pair 1", &PhysicalParams::h1);
        real("h2", "intra-pair backscattering, pair 2", &PhysicalParams::h2);
        real("kappa_in_1", "intrinsic loss, pair 1", &PhysicalParams::kappa_in_1);
        real("kappa_in_2", "intrinsic loss, pair 2", &PhysicalParams::kappa_in_2);
        real("kappa_ex_1", "fiber coupling, pair 1", &PhysicalParams::kappa_ex_1);
        real("kappa_ex_2", "fiber coupling, pair 2", &PhysicalParams::kappa_ex_2);
        real("gamma_1", "decay |3> -> |1>", &PhysicalParams::gamma_1);
        real("gamma_2", "decay |3> -> |2>", &PhysicalParams::gamma_2);
        real("p", "inter-pair scattering p", &PhysicalParams::p);
        real("q", "inter-pair scattering q", &PhysicalParams::q);
        real("epsilon", "probe frequency difference", &PhysicalParams::epsilon);
        real("delta_ground", "ground-state splitting", &PhysicalParams::delta_ground);
        real("Delta_1", "atom-probe detuning 1", &PhysicalParams::Delta_1);
        real("Delta_2", "atom-probe detuning 2", &PhysicalParams::Delta_2);
        real("delta_c_1", "cavity-probe detuning 1", &PhysicalParams::delta_c_1);
        real("delta_c_2", "cavity-probe detuning 2", &PhysicalParams::delta_c_2);
        cmplx("E_1", "drive amplitude 1 (re or re,im)", &PhysicalParams::E_1);
        cmplx("E_2", "drive amplitude 2 (re or re,im)", &PhysicalParams::E_2);
        real("phase_1", "k_1 x", &PhysicalParams::phase_1);
        real("phase_2", "k_2 x", &PhysicalParams::phase_2);
        real("radial_factor", "radial mode factor f(r,z)", &PhysicalParams::radial_factor);
        f.push_back({"slave_cavity_detuning", FieldKind::Flag, "set delta_c_i = Delta_i", {}, {},
                     [](PhysicalParams& p) -> bool& { return p.slave_cavity_detuning; }});
        return f;
    }();
    return fields;
}

inline const FieldInfo* find_field(std::string_view name) {
    const auto& reg = field_registry();
    auto it = std::find_if(reg.begin(), reg.end(), [&](const FieldInfo& f) { return f.name == name; });
    return it == reg.end() ? nullptr : &*it;
}

inline bool is_real_field(std::string_view name) {
    const FieldInfo* f = find_field(name);
    return f && f->kind == FieldKind::Real;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw Error(ErrorCode::BadValue, std::string(key) + ": cannot parse '" + t + "' as a number");
    return v;
}

} // namespace detail

/// Assign one field from its textual value.
inline void set_field(PhysicalParams& p, std::string_view key, std::string_view value) {
    const FieldInfo* f = find_field(key);
    if (!f) throw Error(ErrorCode::UnknownKey, "unknown parameter '" + std::string(key) + "'");
    switch (f->kind) {
    case FieldKind::Real:
        f->real(p) = detail::parse_double(key, value);
        break;
    case FieldKind::Complex: {
        const auto comma = value.find(',');
        if (comma == std::string_view::npos) {
            f->complex(p) = cplx(detail::parse_double(key, value), 0.0);
        } else {
            f->complex(p) = cplx(detail::parse_double(key, value.substr(0, comma)),
                                 detail::parse_double(key, value.substr(comma + 1)));
        }
        break;
    }
    case FieldKind::Flag: {
        const std::string t = detail::trim(value);
        if (t == "true" || t == "1" || t == "yes") f->flag(p) = true;
        else if (t == "false" || t == "0" || t == "no") f->flag(p) = false;
        else throw Error(ErrorCode::BadValue, std::string(key) + ": expected true or false");
        break;
    }
    }
}

inline std::string format_field(const PhysicalParams& params, const FieldInfo& f) {
    PhysicalParams p = params;
    std::ostringstream os;
    os.precision(17);
    switch (f.kind) {
    case FieldKind::Real: os << f.real(p); break;
    case FieldKind::Complex: os << f.complex(p).real() << ',' << f.complex(p).imag(); break;
    case FieldKind::Flag: os << (f.flag(p) ? "true" : "false"); break;
    }
    return os.str();
}

/// Apply "key = value" lines on top of `base`.
inline PhysicalParams parse_config(std::istream& in, PhysicalParams base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::BadValue, "line " + std::to_string(lineno) + ": expected key = value");
        try {
            set_field(base, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.message());
        }
    }
    return base;
}

inline PhysicalParams load_config(const std::string& path, PhysicalParams base = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open config '" + path + "'");
    return parse_config(in, std::move(base));
}

/// Every field as "key = value", in registry order.
inline std::string to_config_text(const PhysicalParams& p) {
    std::string out;
    for (const auto& f : field_registry()) out += f.name + " = " + format_field(p, f) + "\n";
    return out;
}

inline PhysicalParams preset_by_name(std::string_view name) {
    if (name == "strong") return presets::strong();
    if (name == "bad_cavity") return presets::bad_cavity();
    if (name == "none" || name == "default") return PhysicalParams{};
    throw Error(ErrorCode::BadValue, "unknown preset '" + std::string(name) + "'");
}

} // namespace wgm
