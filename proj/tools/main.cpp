// Command-line front end. Every subcommand echoes its resolved parameters
// to a config file next to its output so a run can be reproduced from the
// artifacts alone. All outputs are plain text or CSV written atomically
// (temp file + rename), and identical argv produces bit-identical files.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctflow/flux.hpp"
#include "ctflow/kernel.hpp"
#include "ctflow/pde.hpp"
#include "ctflow/phase.hpp"
#include "ctflow/profiles.hpp"
#include "ctflow/threshold.hpp"

namespace fs = std::filesystem;
using namespace ctflow;

namespace {

// shortest decimal round-trip representation keeps CSVs deterministic
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char s[32];
            std::snprintf(s, sizeof(s), "%.*g", prec, v);
            if (std::strtod(s, nullptr) == v) return s;
        }
    }
    return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

// ordered key=value echo of the resolved parameters of a run
struct ConfigEcho {
    std::vector<std::pair<std::string, std::string>> items;

    void add(const std::string& k, const std::string& v) {
        items.emplace_back(k, v);
    }
    void add(const std::string& k, double v) { add(k, fmt(v)); }
    void add(const std::string& k, int v) { add(k, std::to_string(v)); }

    void write(const fs::path& path) const {
        std::string s;
        for (const auto& [k, v] : items) s += k + "=" + v + "\n";
        write_atomic(path, s);
    }
};

// config echo sits inside directory outputs, alongside file outputs
fs::path config_path_for(const fs::path& out, bool out_is_dir) {
    if (out_is_dir) return out / "config.txt";
    return out.string() + ".config.txt";
}

ProfileSamples read_profile_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,rho,drho", 0) != 0) {
        throw std::invalid_argument("profile CSV must start with header x,rho,drho");
    }
    ProfileSamples s;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
            !std::getline(row, c)) {
            throw std::invalid_argument("malformed profile CSV row: " + line);
        }
        s.x.push_back(std::stod(a));
        s.rho.push_back(std::stod(b));
        s.drho.push_back(std::stod(c));
    }
    if (s.x.empty()) throw std::invalid_argument("profile CSV has no samples");
    return s;
}

NonlocalFactorModel parse_factor_spec(const std::string& spec) {
    if (spec == "one") return NonlocalFactorModel::one();
    if (spec.rfind("lower:", 0) == 0) {
        return NonlocalFactorModel::lower(std::stod(spec.substr(6)));
    }
    throw std::invalid_argument("factor spec must be one | lower:<m>");
}

std::optional<ThresholdCurve> maybe_gamma(const FluxModel& flux) {
    if (flux.rho_c >= 1.0) return std::nullopt;
    return build_gamma(flux);
}

int cmd_validate_flux(const std::string& flux_spec, int samples,
                      const std::string& out) {
    const auto flux = parse_flux_spec(flux_spec);
    const auto report = validate_hypotheses(flux, samples);

    std::string text;
    for (const auto& c : report.checks) {
        text += (c.passed ? "pass  " : "FAIL  ") + c.name;
        if (!c.passed) text += "  worst=" + fmt(c.worst);
        text += "\n";
    }
    text += std::string("result=") + (report.all_passed() ? "pass" : "fail") + "\n";
    std::fputs(text.c_str(), stdout);
    write_atomic(out, text);

    ConfigEcho cfg;
    cfg.add("subcommand", "validate-flux");
    cfg.add("flux", flux_spec);
    cfg.add("samples", samples);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return report.all_passed() ? 0 : 2;
}

int cmd_curve(const std::string& flux_spec, const std::string& which,
              const std::string& out) {
    const auto flux = parse_flux_spec(flux_spec);
    ThresholdCurve curve;
    if (which == "sigma") {
        curve = build_sigma(flux);
    } else if (which == "gamma") {
        if (flux.rho_c >= 1.0) {
            throw std::invalid_argument(
                "gamma curve needs an inflection point; flux is concave");
        }
        curve = build_gamma(flux);
    } else {
        throw std::invalid_argument("--which must be sigma or gamma");
    }

    std::string csv = "rho,value\n";
    for (size_t i = 0; i < curve.grid.size(); ++i) {
        csv += fmt(curve.grid[i]) + "," + fmt(curve.values[i]) + "\n";
    }
    csv += "# blowup_at=";
    csv += curve.blowup_at ? fmt(*curve.blowup_at) : std::string("none");
    csv += "\n";
    write_atomic(out, csv);

    ConfigEcho cfg;
    cfg.add("subcommand", "curve");
    cfg.add("flux", flux_spec);
    cfg.add("which", which);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return 0;
}

int cmd_classify(const std::string& flux_spec, const std::string& kernel_spec,
                 std::optional<double> rho0, std::optional<double> d0,
                 const std::string& profile_spec, const std::string& csv_path,
                 double a, double b, int cells, const std::string& out) {
    const auto kernel = parse_kernel_spec(kernel_spec);
    if (kernel.kind != KernelSpec::Kind::InfiniteLookAhead) {
        throw std::invalid_argument(
            "classification thresholds hold only for the infinite kernel");
    }
    const auto flux = parse_flux_spec(flux_spec);
    const auto sigma = build_sigma(flux);
    const auto gamma = maybe_gamma(flux);

    Classification cls;
    ConfigEcho cfg;
    cfg.add("subcommand", "classify");
    cfg.add("flux", flux_spec);
    cfg.add("kernel", kernel_spec);
    if (rho0 && d0) {
        cls = classify_pair(flux, sigma, gamma, *rho0, *d0);
        cfg.add("rho0", *rho0);
        cfg.add("d0", *d0);
    } else if (!csv_path.empty()) {
        cls = classify_profile(flux, sigma, gamma, read_profile_csv(csv_path));
        cfg.add("csv", csv_path);
    } else if (!profile_spec.empty()) {
        const auto p = parse_profile_spec(profile_spec);
        cls = classify_profile(flux, sigma, gamma,
                               sample(p, GridSpec{a, b, cells}));
        cfg.add("profile", profile_spec);
        cfg.add("a", a);
        cfg.add("b", b);
        cfg.add("cells", cells);
    } else {
        throw std::invalid_argument(
            "classify needs --rho0/--d0, --profile, or --csv");
    }

    std::string text = "region=" + to_string(cls.region) + "\n";
    text += "witness_x=" + (cls.witness_x ? fmt(*cls.witness_x) : std::string("none")) + "\n";
    text += "margin=" + fmt(cls.margin) + "\n";
    text += "note=" + cls.note + "\n";
    std::fputs(text.c_str(), stdout);
    write_atomic(out, text);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return 0;
}

int cmd_phase(const std::string& flux_spec, double rho0, double d0,
              const std::string& factor_spec, double t_max,
              const std::string& out) {
    const auto flux = parse_flux_spec(flux_spec);
    const auto factor = parse_factor_spec(factor_spec);
    PhaseIntegrateOptions opt;
    opt.t_max = t_max;
    const auto traj = integrate_phase(flux, factor, rho0, d0, opt);

    std::string csv = "t,rho,d\n";
    for (const auto& s : traj.states) {
        csv += fmt(s.t) + "," + fmt(s.rho) + "," + fmt(s.d) + "\n";
    }
    csv += "# terminal=" + to_string(traj.terminal) + "\n";
    csv += "# t_star=" + (traj.t_star ? fmt(*traj.t_star) : std::string("none")) + "\n";
    write_atomic(out, csv);
    std::printf("terminal=%s t_star=%s\n", to_string(traj.terminal).c_str(),
                traj.t_star ? fmt(*traj.t_star).c_str() : "none");

    ConfigEcho cfg;
    cfg.add("subcommand", "phase");
    cfg.add("flux", flux_spec);
    cfg.add("rho0", rho0);
    cfg.add("d0", d0);
    cfg.add("factor", factor_spec);
    cfg.add("tmax", t_max);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return 0;
}

int cmd_phase_portrait(const std::string& flux_spec, const std::string& grid,
                       const std::string& factor_spec, double rho_min,
                       double rho_max, double d_min, double d_max, double t_max,
                       const std::string& out) {
    const auto flux = parse_flux_spec(flux_spec);
    const auto factor = parse_factor_spec(factor_spec);
    int nr = 0, nd = 0;
    if (std::sscanf(grid.c_str(), "%dx%d", &nr, &nd) != 2 || nr < 2 || nd < 2) {
        throw std::invalid_argument("--grid must look like 20x20");
    }
    const auto sigma = build_sigma(flux);
    const auto gamma = maybe_gamma(flux);
    PhaseIntegrateOptions opt;
    opt.t_max = t_max;

    std::string csv = "rho0,d0,region,terminal,t_star\n";
    for (int i = 0; i < nr; ++i) {
        const double r = rho_min + (rho_max - rho_min) * i / (nr - 1.0);
        for (int j = 0; j < nd; ++j) {
            const double d = d_min + (d_max - d_min) * j / (nd - 1.0);
            const auto cls = classify_pair(flux, sigma, gamma, r, d);
            const auto traj = integrate_phase(flux, factor, r, d, opt);
            csv += fmt(r) + "," + fmt(d) + "," + to_string(cls.region) + "," +
                   to_string(traj.terminal) + "," +
                   (traj.t_star ? fmt(*traj.t_star) : std::string("none")) + "\n";
        }
    }
    write_atomic(out, csv);

    ConfigEcho cfg;
    cfg.add("subcommand", "phase-portrait");
    cfg.add("flux", flux_spec);
    cfg.add("grid", grid);
    cfg.add("factor", factor_spec);
    cfg.add("rho-min", rho_min);
    cfg.add("rho-max", rho_max);
    cfg.add("d-min", d_min);
    cfg.add("d-max", d_max);
    cfg.add("tmax", t_max);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return 0;
}

int cmd_simulate(const std::string& flux_spec, const std::string& kernel_spec,
                 const std::string& profile_spec, double t_end, int cells,
                 double cfl, double a, double b, const std::string& out_dir) {
    const auto flux = parse_flux_spec(flux_spec);
    const auto kernel = parse_kernel_spec(kernel_spec);
    const auto profile = parse_profile_spec(profile_spec);

    SimulateOptions opt;
    opt.t_end = t_end;
    opt.n_cells = cells;
    opt.cfl = cfl;
    opt.domain_a = a;
    opt.domain_b = b;

    std::string snapshots = "t,x,rho\n";
    opt.on_snapshot = [&](const GridSolution& s) {
        for (int i = 0; i < s.grid.n_cells; ++i) {
            snapshots += fmt(s.t) + "," + fmt(s.grid.center(i)) + "," +
                         fmt(s.rho[i]) + "\n";
        }
    };
    const auto [sol, report] = simulate(flux, kernel, profile, opt);

    std::string diag = "t,mass,rho_min,rho_max,grad_max,grad_min,rhobar_max\n";
    for (const auto& h : sol.history) {
        diag += fmt(h.t) + "," + fmt(h.mass) + "," + fmt(h.rho_min) + "," +
                fmt(h.rho_max) + "," + fmt(h.grad_max) + "," +
                fmt(h.grad_min) + "," + fmt(h.rhobar_max) + "\n";
    }

    std::string shock = "detected=";
    shock += report.detected ? "true" : "false";
    shock += "\nt_shock=" +
             (report.t_shock ? fmt(*report.t_shock) : std::string("none"));
    shock += "\nx_shock=" +
             (report.x_shock ? fmt(*report.x_shock) : std::string("none"));
    shock += "\ngradient_sign=" + std::to_string(report.gradient_sign);
    shock += "\nrefinement_evidence=" + fmt(report.refinement_evidence) + "\n";

    const fs::path dir(out_dir);
    write_atomic(dir / "snapshots.csv", snapshots);
    write_atomic(dir / "diagnostics.csv", diag);
    write_atomic(dir / "shock.txt", shock);
    std::fputs(shock.c_str(), stdout);

    ConfigEcho cfg;
    cfg.add("subcommand", "simulate");
    cfg.add("flux", flux_spec);
    cfg.add("kernel", kernel_spec);
    cfg.add("profile", profile_spec);
    cfg.add("tend", t_end);
    cfg.add("cells", cells);
    cfg.add("cfl", cfl);
    cfg.add("a", a);
    cfg.add("b", b);
    cfg.add("out", out_dir);
    cfg.write(config_path_for(dir, true));
    return 0;
}

int cmd_profile(const std::string& spec, int cells, double a, double b,
                const std::string& out) {
    const auto p = parse_profile_spec(spec);
    if (std::isnan(a) || std::isnan(b)) {
        a = -p.support_radius;
        b = p.support_radius;
    }
    GridSpec grid{a, b, cells};
    const auto s = sample(p, grid);

    std::string csv = "x,rho,drho\n";
    for (size_t i = 0; i < s.x.size(); ++i) {
        csv += fmt(s.x[i]) + "," + fmt(s.rho[i]) + "," + fmt(s.drho[i]) + "\n";
    }
    write_atomic(out, csv);

    ConfigEcho cfg;
    cfg.add("subcommand", "profile");
    cfg.add("spec", spec);
    cfg.add("cells", cells);
    cfg.add("a", a);
    cfg.add("b", b);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return 0;
}

int cmd_compare_fj(double J, const std::string& out) {
    const auto flux = make_family_j(J);
    const auto sigma = build_sigma(flux);
    double worst_sigma = 0.0;
    for (int i = 0; i <= 980; ++i) {
        const double r = 0.01 + i * 0.001;
        worst_sigma = std::max(
            worst_sigma, std::abs(sigma.value_at(r) - sigma_closed_fj(J, r)));
    }
    std::string text = "sigma_max_dev=" + fmt(worst_sigma) + "\n";

    if (flux.rho_c < 1.0) {
        const auto gamma = build_gamma(flux);
        double worst_gamma = 0.0;
        for (double r = flux.rho_c + 0.02; r <= 0.98 + 1e-12; r += 0.001) {
            worst_gamma = std::max(
                worst_gamma, std::abs(gamma.value_at(r) - gamma_closed_fj(J, r)));
        }
        const double rho_e = 4.0 * J / ((J + 1.0) * (J + 1.0));
        text += "gamma_max_dev=" + fmt(worst_gamma) + "\n";
        text += "gamma_at_rho_e=" + fmt(gamma.value_at(rho_e)) + "\n";
    } else {
        text += "gamma_max_dev=none (flux is concave, no gamma branch)\n";
    }
    std::fputs(text.c_str(), stdout);
    write_atomic(out, text);

    ConfigEcho cfg;
    cfg.add("subcommand", "compare-fj");
    cfg.add("J", J);
    cfg.add("out", out);
    cfg.write(config_path_for(out, false));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critical-threshold toolkit for nonlocal traffic flow"};
    app.require_subcommand(1);

    // validate-flux
    std::string vf_flux = "fj:2", vf_out = "validate-flux.txt";
    int vf_samples = 2001;
    auto* vf = app.add_subcommand("validate-flux",
                                  "check the structural flux hypotheses");
    vf->add_option("--flux", vf_flux, "lwr | fj:<J> | table:<path>");
    vf->add_option("--samples", vf_samples, "sample count for the checks");
    vf->add_option("--out", vf_out, "report file");

    // curve
    std::string cv_flux = "fj:2", cv_which = "sigma", cv_out = "curve.csv";
    auto* cv = app.add_subcommand("curve", "export a threshold curve as CSV");
    cv->add_option("--flux", cv_flux, "lwr | fj:<J> | table:<path>");
    cv->add_option("--which", cv_which, "sigma | gamma");
    cv->add_option("--out", cv_out, "CSV file");

    // classify
    std::string cl_flux = "fj:2", cl_kernel = "infinite", cl_profile, cl_csv,
        cl_out = "classify.txt";
    std::optional<double> cl_rho0, cl_d0;
    double cl_a = -10.0, cl_b = 10.0;
    int cl_cells = 2000;
    auto* cl = app.add_subcommand(
        "classify", "classify a seed pair or an initial profile");
    cl->add_option("--flux", cl_flux, "lwr | fj:<J> | table:<path>");
    cl->add_option("--kernel", cl_kernel, "must be infinite");
    cl->add_option("--rho0", cl_rho0, "seed density");
    cl->add_option("--d0", cl_d0, "seed slope");
    cl->add_option("--profile", cl_profile,
                   "sech2:A=..,w=.. | ssech2:.. | plateau:..");
    cl->add_option("--csv", cl_csv, "profile CSV with header x,rho,drho");
    cl->add_option("--a", cl_a, "sampling domain left end");
    cl->add_option("--b", cl_b, "sampling domain right end");
    cl->add_option("--cells", cl_cells, "sampling cell count");
    cl->add_option("--out", cl_out, "report file");

    // phase
    std::string ph_flux = "fj:2", ph_factor = "one", ph_out = "traj.csv";
    double ph_rho0 = 0.5, ph_d0 = 0.2, ph_tmax = 100.0;
    auto* ph = app.add_subcommand("phase",
                                  "integrate one characteristic trajectory");
    ph->add_option("--flux", ph_flux, "lwr | fj:<J> | table:<path>");
    ph->add_option("--rho0", ph_rho0, "seed density");
    ph->add_option("--d0", ph_d0, "seed slope");
    ph->add_option("--factor", ph_factor, "one | lower:<m>");
    ph->add_option("--tmax", ph_tmax, "integration horizon");
    ph->add_option("--out", ph_out, "CSV file");

    // phase-portrait
    std::string pp_flux = "fj:2", pp_grid = "20x20", pp_factor = "one",
        pp_out = "portrait.csv";
    double pp_rmin = 0.02, pp_rmax = 0.95, pp_dmin = -1.5, pp_dmax = 1.5,
        pp_tmax = 100.0;
    auto* pp = app.add_subcommand(
        "phase-portrait", "classify and integrate a grid of seeds");
    pp->add_option("--flux", pp_flux, "lwr | fj:<J> | table:<path>");
    pp->add_option("--grid", pp_grid, "<n_rho>x<n_d>, e.g. 20x20");
    pp->add_option("--factor", pp_factor, "one | lower:<m>");
    pp->add_option("--rho-min", pp_rmin, "seed density range start");
    pp->add_option("--rho-max", pp_rmax, "seed density range end");
    pp->add_option("--d-min", pp_dmin, "seed slope range start");
    pp->add_option("--d-max", pp_dmax, "seed slope range end");
    pp->add_option("--tmax", pp_tmax, "integration horizon");
    pp->add_option("--out", pp_out, "CSV file");

    // simulate
    std::string sm_flux = "fj:2", sm_kernel = "infinite",
        sm_profile = "sech2:A=0.2,w=4", sm_out = "run";
    double sm_tend = 10.0, sm_cfl = 0.4, sm_a = -10.0, sm_b = 10.0;
    int sm_cells = 400;
    auto* sm = app.add_subcommand("simulate",
                                  "run the finite-volume solver to t_end");
    sm->add_option("--flux", sm_flux, "lwr | fj:<J> | table:<path>");
    sm->add_option("--kernel", sm_kernel, "infinite | indicator:<L> | linear:<L>");
    sm->add_option("--profile", sm_profile,
                   "sech2:A=..,w=.. | ssech2:.. | plateau:..");
    sm->add_option("--tend", sm_tend, "final time");
    sm->add_option("--cells", sm_cells, "cell count (companion uses 2x)");
    sm->add_option("--cfl", sm_cfl, "CFL number in (0,1)");
    sm->add_option("--a", sm_a, "domain left end");
    sm->add_option("--b", sm_b, "domain right end");
    sm->add_option("--out", sm_out, "output directory");

    // profile
    std::string pr_spec = "sech2:A=0.2,w=4", pr_out = "profile.csv";
    int pr_cells = 400;
    double pr_a = std::nan(""), pr_b = std::nan("");
    auto* pr = app.add_subcommand("profile",
                                  "sample an initial profile to CSV");
    pr->add_option("--spec", pr_spec,
                   "sech2:A=..,w=.. | ssech2:.. | plateau:..");
    pr->add_option("--cells", pr_cells, "sample count");
    pr->add_option("--a", pr_a, "domain left end (default -support_radius)");
    pr->add_option("--b", pr_b, "domain right end (default +support_radius)");
    pr->add_option("--out", pr_out, "CSV file");

    // compare-fj
    double cf_J = 2.0;
    std::string cf_out = "compare-fj.txt";
    auto* cf = app.add_subcommand(
        "compare-fj", "numeric threshold curves vs closed forms");
    cf->add_option("--J", cf_J, "family exponent");
    cf->add_option("--out", cf_out, "report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (vf->parsed()) return cmd_validate_flux(vf_flux, vf_samples, vf_out);
        if (cv->parsed()) return cmd_curve(cv_flux, cv_which, cv_out);
        if (cl->parsed()) {
            return cmd_classify(cl_flux, cl_kernel, cl_rho0, cl_d0, cl_profile,
                                cl_csv, cl_a, cl_b, cl_cells, cl_out);
        }
        if (ph->parsed()) {
            return cmd_phase(ph_flux, ph_rho0, ph_d0, ph_factor, ph_tmax,
                             ph_out);
        }
        if (pp->parsed()) {
            return cmd_phase_portrait(pp_flux, pp_grid, pp_factor, pp_rmin,
                                      pp_rmax, pp_dmin, pp_dmax, pp_tmax,
                                      pp_out);
        }
        if (sm->parsed()) {
            return cmd_simulate(sm_flux, sm_kernel, sm_profile, sm_tend,
                                sm_cells, sm_cfl, sm_a, sm_b, sm_out);
        }
        if (pr->parsed()) {
            return cmd_profile(pr_spec, pr_cells, pr_a, pr_b, pr_out);
        }
        if (cf->parsed()) return cmd_compare_fj(cf_J, cf_out);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
