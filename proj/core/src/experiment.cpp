#include "pat/experiment.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace pat {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676655900577;

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: boolean expected for " + key + ", got '" + v + "'");
}

double parse_num(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: number expected for " + key + ", got '" + v + "'");
    }
}

// T accepts "<number>" or "<number> * T0" (any spacing, case-insensitive T0).
void parse_time_span(const std::string& v, ExperimentConfig& cfg) {
    std::string s = v;
    std::string lower;
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const size_t star = lower.find('*');
    if (star == std::string::npos) {
        cfg.T_absolute = parse_num(trim(s), "T");
        cfg.T0_multiple = 0.0;
        return;
    }
    const std::string left = trim(s.substr(0, star));
    const std::string right = trim(lower.substr(star + 1));
    if (right != "t0")
        throw ConfigError("config: T must be a number or '<number> * T0', got '" + v + "'");
    cfg.T0_multiple = parse_num(left, "T");
    cfg.T_absolute = 0.0;
}

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("hash: cannot open " + path);
    uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

std::string hex64(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_manifest(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out(path);
    if (!out) throw IoError("manifest: cannot open " + path);
    for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    if (!out) throw IoError("manifest: write failed for " + path);
}

double resolved_smoothing(const ExperimentConfig& cfg) {
    return cfg.phantom_smoothing > 0.0 ? cfg.phantom_smoothing : 2.0 * cfg.h;
}

// Uniform boundary description matching a trace file.
BoundaryGrid boundary_from_trace(const BoundaryTrace& t) {
    BoundaryGrid g;
    g.radius = t.radius;
    const int n = t.n_b();
    g.node_positions.resize(n);
    g.angles.resize(n);
    g.arc_lengths = t.arc_lengths;
    for (int k = 0; k < n; ++k) {
        const double a = t.arc_lengths[k] / t.radius;
        g.angles[k] = a;
        g.node_positions[k] = {t.radius * std::cos(a), t.radius * std::sin(a)};
    }
    g.segments.resize(n);
    for (int k = 0; k < n; ++k) g.segments[k] = {k, (k + 1) % n};
    return g;
}

void write_field_outputs(const NodalField& f, const std::string& stem) {
    write_field_csv(f, stem + ".csv");
    write_field_binary(f, stem + ".bin");
    write_mesh(*f.space->mesh, stem + ".mesh");
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);

    ExperimentConfig cfg;
    cfg.name = std::filesystem::path(path).stem().string();

    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qual = section.empty() ? key : section + "." + key;

        if (qual == "experiment.name") cfg.name = value;
        else if (qual == "experiment.radius") cfg.radius = parse_num(value, qual);
        else if (qual == "experiment.speed") cfg.speed = value;
        else if (qual == "experiment.phantom") cfg.phantom = value;
        else if (qual == "experiment.smoothing") cfg.phantom_smoothing = parse_num(value, qual);
        else if (qual == "experiment.T") parse_time_span(value, cfg);
        else if (qual == "simulation.h") cfg.h = parse_num(value, qual);
        else if (qual == "simulation.dt_divisor") cfg.sim_dt_divisor = parse_num(value, qual);
        else if (qual == "reconstruction.h_r") cfg.h_r = parse_num(value, qual);
        else if (qual == "reconstruction.dt_divisor") cfg.recon_dt_divisor = parse_num(value, qual);
        else if (qual == "reconstruction.method") cfg.method = value;
        else if (qual == "reconstruction.omega")
            cfg.omega = (value == "auto") ? 0.0 : parse_num(value, qual);
        else if (qual == "reconstruction.tau") cfg.tau = parse_num(value, qual);
        else if (qual == "reconstruction.delta") cfg.delta = parse_num(value, qual);
        else if (qual == "reconstruction.k_max") cfg.k_max = static_cast<int>(parse_num(value, qual));
        else if (qual == "reconstruction.J") cfg.J = static_cast<int>(parse_num(value, qual));
        else if (qual == "reconstruction.snapshot_every")
            cfg.snapshot_every = static_cast<int>(parse_num(value, qual));
        else if (qual == "seeds.noise") cfg.noise_seed = static_cast<uint64_t>(parse_num(value, qual));
        else if (qual == "seeds.omega") cfg.omega_seed = static_cast<uint64_t>(parse_num(value, qual));
        else if (qual == "output.dir") cfg.output_dir = value;
        else if (qual == "flags.allow_inverse_crime") cfg.allow_inverse_crime = parse_bool(value, qual);
        else if (qual == "flags.override_stability") cfg.override_stability = parse_bool(value, qual);
        else if (qual == "flags.lumped_mass") cfg.lumped_mass = parse_bool(value, qual);
        else if (qual == "flags.t0_grid_spacing") cfg.t0_grid_spacing = parse_num(value, qual);
        else if (qual == "output.render_size") cfg.render_size = static_cast<int>(parse_num(value, qual));
        else throw ConfigError("config: unknown key '" + qual + "' at line " + std::to_string(lineno));
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (!(cfg.radius > 0.0)) throw ConfigError("config: radius must be positive");
    if (!(cfg.h > 0.0) || !(cfg.h_r > 0.0)) throw ConfigError("config: mesh sizes must be positive");
    if (cfg.T_absolute <= 0.0 && cfg.T0_multiple <= 0.0)
        throw ConfigError("config: T must be set (number or '<x> * T0')");
    if (!(cfg.tau > 1.0)) throw ConfigError("config: tau must be > 1");
    if (cfg.delta < 0.0) throw ConfigError("config: delta must be >= 0");
    if (cfg.method != "landweber" && cfg.method != "tr" && cfg.method != "tr-harmonic" &&
        cfg.method != "neumann")
        throw ConfigError("config: unknown method '" + cfg.method + "'");
    if (!cfg.override_stability) {
        if (cfg.sim_dt_divisor < 10.0 || cfg.recon_dt_divisor < 10.0)
            throw ConfigError(
                "config: dt divisor below 10 violates the stability guard "
                "(set flags.override_stability to force)");
    }
    if (!cfg.allow_inverse_crime && cfg.h == cfg.h_r &&
        cfg.sim_dt_divisor == cfg.recon_dt_divisor)
        throw ConfigError(
            "config: simulation and reconstruction discretizations coincide "
            "(set flags.allow_inverse_crime to force)");
    SpeedField::parse(cfg.speed, cfg.radius);
    Phantom::parse(cfg.phantom, cfg.radius, 0.01);
}

std::pair<double, double> resolve_time_span(const ExperimentConfig& cfg,
                                            const SpeedField& speed) {
    if (cfg.T_absolute > 0.0) return {cfg.T_absolute, 0.0};
    const double spacing = cfg.t0_grid_spacing > 0.0 ? cfg.t0_grid_spacing : cfg.radius / 100.0;
    const double T0 = estimate_T0(speed, spacing);
    return {cfg.T0_multiple * T0, T0};
}

int cmd_simulate(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    const SpeedField speed = SpeedField::parse(cfg.speed, cfg.radius);
    const auto [T, T0] = resolve_time_span(cfg, speed);

    const double dt_max = cfg.h / (cfg.sim_dt_divisor * speed.c_max());
    const TimeGrid grid = TimeGrid::from_dt(T, dt_max);
    OperatorSetup setup(cfg.radius, cfg.h, speed, grid, cfg.lumped_mass,
                        !cfg.override_stability);

    const Phantom phantom = Phantom::parse(cfg.phantom, cfg.radius, resolved_smoothing(cfg));
    const NodalField f =
        project_analytic([&](Vec2 p) { return phantom.value(p); }, *setup.space);

    const BoundaryTrace m = forward_L(f, setup);

    const std::string base = cfg.output_dir + "/" + cfg.name;
    write_trace(m, base + ".trace");
    write_field_outputs(f, base + ".phantom");

    std::map<std::string, std::string> kv;
    kv["radius"] = fmt17(cfg.radius);
    kv["h"] = fmt17(cfg.h);
    kv["dt"] = fmt17(grid.dt);
    kv["N"] = std::to_string(grid.N);
    kv["T"] = fmt17(T);
    if (T0 > 0.0) kv["T0"] = fmt17(T0);
    if (cfg.T0_multiple > 0.0) kv["T0_multiple"] = fmt17(cfg.T0_multiple);
    kv["n_b"] = std::to_string(setup.boundary.size());
    kv["speed"] = cfg.speed;
    kv["phantom"] = cfg.phantom;
    kv["smoothing"] = fmt17(resolved_smoothing(cfg));
    kv["dt_divisor"] = fmt17(cfg.sim_dt_divisor);
    kv["lumped_mass"] = cfg.lumped_mass ? "true" : "false";
    kv["trace_hash"] = hex64(fnv1a_file(base + ".trace"));
    kv["phantom_hash"] = hex64(fnv1a_file(base + ".phantom.bin"));
    write_manifest(base + ".manifest", kv);
    return 0;
}

int cmd_reconstruct(const ExperimentConfig& cfg, const std::string& trace_path) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    const BoundaryTrace raw = read_trace(trace_path);
    if (std::abs(raw.radius - cfg.radius) > 1e-12 * cfg.radius)
        throw ConfigError("reconstruct: trace radius does not match the configuration");

    const SpeedField speed = SpeedField::parse(cfg.speed, cfg.radius);
    const double T = raw.T();
    const double dt_max = cfg.h_r / (cfg.recon_dt_divisor * speed.c_max());
    const TimeGrid grid_r = TimeGrid::from_dt(T, dt_max);
    OperatorSetup setup(cfg.radius, cfg.h_r, speed, grid_r, cfg.lumped_mass,
                        !cfg.override_stability);

    if (!cfg.allow_inverse_crime && raw.n_b() == setup.boundary.size() &&
        std::abs(raw.dt - grid_r.dt) < 1e-15)
        throw ConfigError(
            "reconstruct: trace was produced on the reconstruction discretization "
            "(set flags.allow_inverse_crime to force)");

    const BoundaryGrid src_boundary = boundary_from_trace(raw);
    const TimeGrid src_grid = TimeGrid::from_steps(T, raw.steps());
    BoundaryTrace m = resample_trace(raw, src_boundary, src_grid, setup.boundary, grid_r);
    if (cfg.delta > 0.0) m = add_noise(m, cfg.delta, cfg.noise_seed);

    const Phantom phantom = Phantom::parse(cfg.phantom, cfg.radius, resolved_smoothing(cfg));
    const NodalField f_true =
        project_analytic([&](Vec2 p) { return phantom.value(p); }, *setup.space);

    const std::string base = cfg.output_dir + "/" + cfg.name;
    NodalField f_rec;
    std::ofstream report(base + ".report.csv");
    if (!report) throw IoError("reconstruct: cannot open report file");
    report << "iter,residual,phantom_error\n";

    // the error column stays empty when the reference phantom is zero
    const bool have_reference = f_true.coeffs.cwiseAbs().maxCoeff() > 0.0;
    auto phantom_err = [&](const NodalField& f) {
        return have_reference ? relative_error(f, f_true, ErrorNorm::L2)
                              : std::numeric_limits<double>::quiet_NaN();
    };

    if (cfg.method == "landweber") {
        LandweberConfig lw;
        lw.omega = cfg.omega;
        lw.tau = cfg.tau;
        lw.delta = cfg.delta;
        lw.k_max = cfg.k_max;
        lw.snapshot_every = cfg.snapshot_every;
        lw.seed = cfg.omega_seed;
        const ReconReport rr = landweber(m, setup, lw);
        f_rec = rr.final_iterate;
        std::map<int, double> snap_err;
        if (have_reference) {
            for (const auto& [k, coeffs] : rr.snapshots) {
                NodalField snap = make_field(*setup.space);
                snap.coeffs = coeffs;
                snap_err[k] = phantom_err(snap);
            }
        }
        for (size_t k = 0; k < rr.residuals.size(); ++k) {
            report << k << "," << fmt17(rr.residuals[k]) << ",";
            if (auto it = snap_err.find(static_cast<int>(k)); it != snap_err.end())
                report << fmt17(it->second);
            report << "\n";
        }
        std::map<std::string, std::string> kv;
        kv["method"] = cfg.method;
        kv["omega"] = fmt17(rr.omega_used);
        kv["stop_reason"] = rr.reason == StopReason::Discrepancy ? "discrepancy" : "cap";
        kv["first_violation_index"] = std::to_string(rr.first_violation_index);
        kv["returned_index"] = std::to_string(rr.returned_index);
        kv["T"] = fmt17(T);
        kv["dt"] = fmt17(grid_r.dt);
        kv["N"] = std::to_string(grid_r.N);
        kv["h_r"] = fmt17(cfg.h_r);
        if (have_reference) kv["phantom_error"] = fmt17(phantom_err(f_rec));
        write_manifest(base + ".recon.manifest", kv);
    } else {
        if (cfg.method == "tr")
            f_rec = time_reversal(m, setup, TimeReversalMode::Plain);
        else if (cfg.method == "tr-harmonic")
            f_rec = time_reversal(m, setup, TimeReversalMode::Harmonic);
        else
            f_rec = neumann_series(m, setup, cfg.J);
        const int iter = (cfg.method == "neumann") ? cfg.J : 0;
        report << iter << ",,";
        if (have_reference) report << fmt17(phantom_err(f_rec));
        report << "\n";
        std::map<std::string, std::string> kv;
        kv["method"] = cfg.method;
        kv["T"] = fmt17(T);
        kv["dt"] = fmt17(grid_r.dt);
        kv["N"] = std::to_string(grid_r.N);
        kv["h_r"] = fmt17(cfg.h_r);
        if (have_reference) kv["phantom_error"] = fmt17(phantom_err(f_rec));
        write_manifest(base + ".recon.manifest", kv);
    }
    if (!report) throw IoError("reconstruct: report write failed");
    report.close();

    write_field_outputs(f_rec, base + ".field");
    render_field_pgm(*setup.space, f_rec.coeffs, base + ".render.pgm", cfg.render_size);
    return 0;
}

int cmd_diagnose(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    const SpeedField speed = SpeedField::parse(cfg.speed, cfg.radius);
    const auto [T, T0] = resolve_time_span(cfg, speed);

    const double dt_max = cfg.h_r / (cfg.recon_dt_divisor * speed.c_max());
    const TimeGrid grid = TimeGrid::from_dt(T, dt_max);
    OperatorSetup setup(cfg.radius, cfg.h_r, speed, grid, cfg.lumped_mass,
                        !cfg.override_stability);

    struct Check {
        std::string name;
        double value, threshold;
        bool pass;
    };
    std::vector<Check> checks;

    {  // adjoint identity with smooth deterministic test fields
        std::mt19937_64 rng(cfg.omega_seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        double cx[4], cy[4], amp[4];
        for (int i = 0; i < 4; ++i) {
            cx[i] = 0.5 * cfg.radius * uni(rng);
            cy[i] = 0.5 * cfg.radius * uni(rng);
            amp[i] = uni(rng);
        }
        const NodalField f = project_analytic(
            [&](Vec2 p) {
                double v = 0.0;
                for (int i = 0; i < 4; ++i)
                    v += amp[i] * gaussian_bump(p, {cx[i], cy[i]}, 0.18 * cfg.radius, cfg.radius);
                return v;
            },
            *setup.space);
        BoundaryTrace h = make_trace(setup.boundary, setup.grid);
        for (int n = 0; n <= setup.grid.N; ++n) {
            const double t = n * setup.grid.dt;
            for (int k = 0; k < setup.boundary.size(); ++k) {
                const double a = setup.boundary.angles[k];
                h.values(n, k) = std::sin(t * 2.1 + 0.3) * (0.7 * std::cos(a) + 0.4 * std::sin(2 * a));
            }
        }
        const BoundaryTrace Lf = forward_L(f, setup);
        const NodalField Lsh = adjoint_L(h, setup);
        const double lhs = l2_sigma_inner(Lf, h);
        const double rhs = h10_inner(f, Lsh, setup.disc.A);
        const double mismatch =
            std::abs(lhs - rhs) /
            (l2_sigma_norm(Lf) * l2_sigma_norm(h) + 1e-300);
        checks.push_back({"adjoint_mismatch", mismatch, 2e-2, mismatch <= 2e-2});
    }

    {  // reflecting energy conservation
        const NodalField g = project_analytic(
            [&](Vec2 p) { return gaussian_bump(p, {0, 0}, 0.15 * cfg.radius, cfg.radius); },
            *setup.space);
        const TimeGrid egrid =
            TimeGrid::from_dt(2.0 * cfg.radius, cfg.h_r / (cfg.recon_dt_divisor * speed.c_max()));
        SolveOptions opts;
        opts.record_energy = true;
        const SolveRecord rec = solve_reflecting(setup.disc, g, egrid, opts);
        double e0 = rec.energy.front(), emin = e0, emax = e0;
        for (double e : rec.energy) {
            emin = std::min(emin, e);
            emax = std::max(emax, e);
        }
        const double drift = (emax - emin) / e0;
        checks.push_back({"reflecting_energy_drift", drift, 1e-2, drift <= 1e-2});
    }

    {  // transparency: interior energy after the wave leaves
        const NodalField g = project_analytic(
            [&](Vec2 p) { return gaussian_bump(p, {0, 0}, 0.15 * cfg.radius, cfg.radius); },
            *setup.space);
        const double T_tr = 3.0 * cfg.radius / speed.c_min();
        const TimeGrid tgrid =
            TimeGrid::from_dt(T_tr, cfg.h_r / (cfg.recon_dt_divisor * speed.c_max()));
        const CQWeightSet w = load_or_compute_weights(setup.boundary, tgrid.N, tgrid.dt);
        SolveOptions opts;
        opts.record_energy = true;
        const SolveRecord rec =
            solve_transmission(setup.disc, w, g, Eigen::MatrixXd(), tgrid, opts);
        const double ratio = rec.energy.back() / rec.energy.front();
        checks.push_back({"transparency_residual_energy", ratio, 5e-2, ratio <= 5e-2});
    }

    {  // omega estimation
        const OmegaEstimate est = estimate_omega(setup, 8, cfg.omega_seed);
        const double prod = est.omega * est.lambda_max;
        checks.push_back({"omega_lambda_product", prod, 0.95,
                          std::abs(prod - 0.95) <= 1e-12});
        checks.push_back({"omega_converged", est.converged ? 1.0 : 0.0, 1.0, est.converged});
    }

    const std::string path = cfg.output_dir + "/" + cfg.name + ".diagnose.csv";
    std::ofstream out(path);
    if (!out) throw IoError("diagnose: cannot open " + path);
    out << "check,value,threshold,pass\n";
    bool all_pass = true;
    for (const auto& c : checks) {
        out << c.name << "," << fmt17(c.value) << "," << fmt17(c.threshold) << ","
            << (c.pass ? "1" : "0") << "\n";
        all_pass = all_pass && c.pass;
    }
    out.close();
    if (!all_pass) throw NumericError("diagnose: checks failed, see " + path);
    return 0;
}

void render_field_pgm(const FemSpace& space, const Eigen::VectorXd& coeffs,
                      const std::string& image_path, int size) {
    const double R = space.mesh->radius;
    const FieldEvaluator eval(space);
    std::vector<double> img(static_cast<size_t>(size) * size, 0.0);
    double vmin = 1e300, vmax = -1e300;
    for (int row = 0; row < size; ++row) {
        const double y = R - (row + 0.5) * 2.0 * R / size;  // top row = +y
        for (int col = 0; col < size; ++col) {
            const double x = -R + (col + 0.5) * 2.0 * R / size;
            bool inside = false;
            const double v = eval.evaluate(coeffs, {x, y}, &inside);
            img[static_cast<size_t>(row) * size + col] = inside ? v : 0.0;
            vmin = std::min(vmin, img[static_cast<size_t>(row) * size + col]);
            vmax = std::max(vmax, img[static_cast<size_t>(row) * size + col]);
        }
    }
    std::ofstream out(image_path, std::ios::binary);
    if (!out) throw IoError("render: cannot open " + image_path);
    out << "P5\n" << size << " " << size << "\n65535\n";
    const double scale = (vmax > vmin) ? 65535.0 / (vmax - vmin) : 0.0;
    for (double v : img) {
        const int q = static_cast<int>(std::lround((v - vmin) * scale));
        const uint16_t pix = static_cast<uint16_t>(std::clamp(q, 0, 65535));
        const unsigned char hi = static_cast<unsigned char>(pix >> 8);
        const unsigned char lo = static_cast<unsigned char>(pix & 0xff);
        out.put(static_cast<char>(hi));
        out.put(static_cast<char>(lo));
    }
    if (!out) throw IoError("render: write failed for " + image_path);

    std::ofstream side(image_path + ".scale.txt");
    side << "min = " << fmt17(vmin) << "\nmax = " << fmt17(vmax) << "\nsize = " << size
         << "\n";
}

int cmd_render(const std::string& field_path, const std::string& image_path, int size,
               const std::string& mesh_path) {
    std::string mesh_file = mesh_path;
    if (mesh_file.empty()) {
        std::filesystem::path p(field_path);
        p.replace_extension(".mesh");
        mesh_file = p.string();
    }
    const TriMesh mesh = read_mesh(mesh_file);
    const FemSpace space(mesh);
    const Eigen::VectorXd coeffs = read_field_binary(field_path);
    if (coeffs.size() != space.n_dofs())
        throw IoError("render: field size does not match mesh (" + std::to_string(coeffs.size()) +
                      " vs " + std::to_string(space.n_dofs()) + ")");
    render_field_pgm(space, coeffs, image_path, size);
    return 0;
}

int cmd_t0(const ExperimentConfig& cfg) {
    const SpeedField speed = SpeedField::parse(cfg.speed, cfg.radius);
    const double spacing =
        cfg.t0_grid_spacing > 0.0 ? cfg.t0_grid_spacing : cfg.radius / 100.0;
    const double T0 = estimate_T0(speed, spacing);
    std::printf("T0 = %.17g\n", T0);
    return 0;
}

}  // namespace pat
