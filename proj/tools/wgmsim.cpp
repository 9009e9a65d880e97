#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgm/wgm.hpp"

namespace {

using namespace wgm;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::string config;
    std::string preset = "none";
    std::map<std::string, std::string> fields;
    std::map<std::string, CLI::Option*> field_options;
    std::string frame = "displaced";
    std::string backend = "umfpack";
    std::string caps = "1,1,1,1";
    bool nullspace_fallback = false;
    unsigned workers = 0;
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "key = value parameter file");
    sub->add_option("--preset", o.preset, "base parameters: strong, bad_cavity, none");
    for (const auto& f : field_registry())
        o.field_options[f.name] = sub->add_option("--" + f.name, o.fields[f.name], f.description)->group("Parameters");
    sub->add_option("--frame", o.frame, "TH frame: displaced or bare");
    sub->add_option("--backend", o.backend, "TH linear solver: umfpack, sparselu, dense");
    sub->add_option("--caps", o.caps, "TH photon caps A1,B1,A2,B2");
    sub->add_flag("--nullspace-fallback", o.nullspace_fallback, "return the long-time limit for singular generators");
    sub->add_option("--workers", o.workers, "worker threads (0: all cores)");
    sub->add_flag("--quiet", o.quiet, "no progress output");
}

/// preset, then config file, then individual flags.
PhysicalParams resolve_params(const CommonOptions& o) {
    PhysicalParams p = preset_by_name(o.preset);
    if (!o.config.empty()) p = load_config(o.config, p);
    for (const auto& [name, opt] : o.field_options)
        if (opt->count() > 0) set_field(p, name, o.fields.at(name));
    return p;
}

Overrides explicit_overrides(const CommonOptions& o) {
    Overrides out;
    if (!o.config.empty()) {
        const PhysicalParams base = preset_by_name("none");
        const PhysicalParams cfg = load_config(o.config, base);
        for (const auto& f : field_registry())
            if (format_field(cfg, f) != format_field(base, f)) out.emplace_back(f.name, format_field(cfg, f));
    }
    for (const auto& [name, opt] : o.field_options)
        if (opt->count() > 0) out.emplace_back(name, o.fields.at(name));
    return out;
}

ThOptions resolve_th(const CommonOptions& o) {
    ThOptions th;
    if (o.frame == "displaced") th.frame = Frame::Displaced;
    else if (o.frame == "bare") th.frame = Frame::Bare;
    else throw Error(ErrorCode::BadValue, "unknown frame '" + o.frame + "'");
    if (o.backend == "umfpack") th.solve.backend = LinearBackend::Umfpack;
    else if (o.backend == "sparselu") th.solve.backend = LinearBackend::SparseLU;
    else if (o.backend == "dense") th.solve.backend = LinearBackend::DenseLU;
    else throw Error(ErrorCode::UnsupportedBackend, "unknown backend '" + o.backend + "'");
    std::stringstream ss(o.caps);
    std::string item;
    for (int m = 0; m < 4; ++m) {
        if (!std::getline(ss, item, ','))
            throw Error(ErrorCode::BadValue, "--caps needs four comma-separated integers");
        th.caps[m] = static_cast<int>(detail::parse_double("caps", item));
    }
    th.solve.nullspace_fallback = o.nullspace_fallback;
    return th;
}

std::vector<Observable> resolve_observables(const std::string& list) {
    std::vector<Observable> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) out.push_back(parse_observable(item));
    }
    return out;
}

struct ScanOptions {
    std::string method = "TH";
    std::string observables = "F_a1,F_b1,F_a2,F_b2,P1,P2,P3";
    std::string out = "wgmsim";
};

ProgressCallback progress_printer(bool quiet) {
    if (quiet) return {};
    return [](std::size_t done, std::size_t total) {
        if (done == total || done % 50 == 0) std::fprintf(stderr, "\r%zu/%zu cells", done, total);
        if (done == total) std::fputc('\n', stderr);
    };
}

int report_scan(const ResultTable& table, const std::string& stem) {
    const EmittedFiles files = emit(table, stem);
    for (const auto& p : files.paths) std::cout << "wrote " << p.string() << '\n';
    const std::size_t errors = table.error_count();
    std::cout << table.rows.size() << " cells, " << errors << " errors, max residual "
              << format_number(table.max_residual()) << ", " << table.elapsed_seconds << " s\n";
    for (const auto& r : table.rows)
        if (r.error) {
            std::cerr << "first failed cell: " << to_string(r.error->code) << ": " << r.error->message << '\n';
            break;
        }
    return errors == 0 ? kExitOk : kExitFailed;
}

ScanSpec make_spec(const CommonOptions& common, const ScanOptions& scan, std::vector<Axis> axes) {
    ScanSpec spec;
    spec.method = parse_method(scan.method);
    spec.axes = std::move(axes);
    spec.base = resolve_params(common);
    spec.preset = common.preset;
    spec.observables = resolve_observables(scan.observables);
    spec.th = resolve_th(common);
    spec.workers = common.workers;
    return spec;
}

int run_dressed(const CommonOptions& common, int sector, const std::string& out) {
    const auto vp = validate(resolve_params(common));
    nlohmann::json doc{{"schema", "wgmsim.dressed/1"}, {"sectors", nlohmann::json::array()}};
    const int lo = sector < 0 ? 0 : sector, hi = sector < 0 ? kMaxDressedSector : sector;
    for (int s = lo; s <= hi; ++s) {
        const DressedSpectrum d = numeric_dressed(vp, s);
        std::cout << "sector " << s << " (" << d.basis.size() << " states)\n";
        nlohmann::json levels = nlohmann::json::array();
        for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k) {
            std::cout << "  E = " << format_number(d.eigenvalues(k)) << "  resonant at Delta = "
                      << format_number(-d.eigenvalues(k)) << "\n   ";
            nlohmann::json comps = nlohmann::json::object();
            for (std::size_t b = 0; b < d.labels.size(); ++b) {
                const cplx c = d.eigenvectors(static_cast<Eigen::Index>(b), k);
                if (std::abs(c) < 1e-10) continue;
                std::cout << ' ' << d.labels[b] << ':' << detail::short_number(c.real())
                          << (c.imag() >= 0 ? "+" : "") << detail::short_number(c.imag()) << 'i';
                comps[d.labels[b]] = {c.real(), c.imag()};
            }
            std::cout << '\n';
            levels.push_back({{"energy", d.eigenvalues(k)}, {"components", comps}});
        }
        doc["sectors"].push_back({{"sector", s}, {"levels", levels}});
    }
    const auto g = mode_couplings(vp);
    const auto& p = vp.params();
    if (p.h1 == p.h2 && std::abs(g.gB_1 - g.gB_2) < 1e-12 && std::abs(g.gA_1) < 1e-12 && std::abs(g.gA_2) < 1e-12) {
        const auto cf = closed_form_eigenvalues(g.gB_1, p.h1);
        std::cout << "closed form e1..e5:";
        for (double e : cf) std::cout << ' ' << format_number(e);
        std::cout << '\n';
        doc["closed_form"] = cf;
    }
    if (!out.empty()) {
        write_atomically(out, doc.dump(2) + "\n");
        std::cout << "wrote " << out << '\n';
    }
    return kExitOk;
}

int run_validate(const CommonOptions& common, const std::string& json_out) {
    const Overrides overrides = explicit_overrides(common);
    const auto results = run_acceptance(overrides);
    bool all = true;
    nlohmann::json doc{{"schema", "wgmsim.validate/1"}, {"criteria", nlohmann::json::array()}};
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name << "): " << r.detail
                  << '\n';
        all = all && r.passed;
        doc["criteria"].push_back(to_json(r));
    }
    doc["all_passed"] = all;
    if (!json_out.empty()) write_atomically(json_out, doc.dump(2) + "\n");
    return all ? kExitOk : kExitFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state simulator for a three-level atom coupled to two WGM mode pairs"};
    app.require_subcommand(1);

    CommonOptions common;
    ScanOptions scan;

    auto* spectrum = app.add_subcommand("spectrum", "1D sweep of one parameter");
    std::string axis = "Delta_1:-250:250:1";
    spectrum->add_option("--axis", axis, "NAME:min:max:step");
    spectrum->add_option("--method", scan.method, "TH, AE, BOTH or NO_ATOM");
    spectrum->add_option("--observables", scan.observables, "comma-separated observables");
    spectrum->add_option("--out", scan.out, "output file stem");
    add_common(spectrum, common);

    auto* map2d = app.add_subcommand("map2d", "2D sweep over two parameters");
    std::string x_axis = "Delta_1:-250:250:5", y_axis = "Delta_2:-250:250:5";
    map2d->add_option("--x", x_axis, "first axis NAME:min:max:step");
    map2d->add_option("--y", y_axis, "second axis NAME:min:max:step");
    map2d->add_option("--method", scan.method, "TH, AE, BOTH or NO_ATOM");
    map2d->add_option("--observables", scan.observables, "comma-separated observables");
    map2d->add_option("--out", scan.out, "output file stem");
    add_common(map2d, common);

    auto* compare = app.add_subcommand("compare", "TH and AE along one axis, overlaid");
    std::string compare_axis = "Delta_1:-100:100:1";
    std::string compare_obs = "F_a1";
    compare->add_option("--axis", compare_axis, "NAME:min:max:step");
    compare->add_option("--observables", compare_obs, "comma-separated observables");
    compare->add_option("--out", scan.out, "output file stem");
    add_common(compare, common);

    auto* dressed = app.add_subcommand("dressed", "dressed-state energies of the drive-free Hamiltonian");
    int sector = -1;
    std::string dressed_out;
    dressed->add_option("--sector", sector, "excitation sector 0..2 (default: all)");
    dressed->add_option("--out", dressed_out, "level-scheme JSON file");
    add_common(dressed, common);

    auto* validate_cmd = app.add_subcommand("validate", "run the acceptance suite");
    std::string validate_json;
    validate_cmd->add_option("--json", validate_json, "machine-readable report file");
    add_common(validate_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (spectrum->parsed()) {
            const ScanSpec spec = make_spec(common, scan, {parse_axis(axis)});
            return report_scan(run_scan(spec, progress_printer(common.quiet)), scan.out);
        }
        if (map2d->parsed()) {
            const ScanSpec spec = make_spec(common, scan, {parse_axis(x_axis), parse_axis(y_axis)});
            return report_scan(run_scan(spec, progress_printer(common.quiet)), scan.out);
        }
        if (compare->parsed()) {
            ScanOptions both = scan;
            both.method = "BOTH";
            both.observables = compare_obs;
            const ScanSpec spec = make_spec(common, both, {parse_axis(compare_axis)});
            const ResultTable table = run_scan(spec, progress_printer(common.quiet));
            const int code = report_scan(table, scan.out);
            double worst = 0.0;
            for (std::size_t k = 0; k + 1 < table.columns.size(); ++k) {
                const auto& c = table.columns[k];
                if (c.size() < 3 || c.compare(c.size() - 3, 3, "_th") != 0) continue;
                const int ae = table.column_index(c.substr(0, c.size() - 3) + "_ae");
                for (const auto& r : table.rows)
                    if (!r.error && r.values[k] != 0.0)
                        worst = std::max(worst, std::abs(r.values[k] - r.values[ae]) / std::abs(r.values[k]));
            }
            std::cout << "max relative TH/AE deviation " << format_number(worst) << '\n';
            return code;
        }
        if (dressed->parsed()) return run_dressed(common, sector, dressed_out);
        if (validate_cmd->parsed()) return run_validate(common, validate_json);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
