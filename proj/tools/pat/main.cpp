#include "pat/errors.hpp"
#include "pat/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int run(int argc, char** argv) {
    CLI::App app{"Photoacoustic tomography experiments: coupled interior/boundary-integral "
                 "wave solver with iterative and time-reversal reconstruction"};
    app.require_subcommand(1);

    std::string config_path, trace_path, field_path, image_path, mesh_path;
    int render_size = 512;

    auto* sim = app.add_subcommand("simulate", "Generate measurement data from a phantom");
    sim->add_option("-c,--config", config_path, "Experiment configuration file")->required();

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a phantom from a trace file");
    rec->add_option("-c,--config", config_path, "Experiment configuration file")->required();
    rec->add_option("-i,--input", trace_path, "Measurement trace file")->required();

    auto* dia = app.add_subcommand("diagnose", "Run solver health checks on a configuration");
    dia->add_option("-c,--config", config_path, "Experiment configuration file")->required();

    auto* ren = app.add_subcommand("render", "Rasterize a field file to a 16-bit PGM");
    ren->add_option("-i,--input", field_path, "Field file (.bin)")->required();
    ren->add_option("-o,--output", image_path, "Output PGM path")->required();
    ren->add_option("--mesh", mesh_path, "Mesh file (default: sibling .mesh)");
    ren->add_option("--size", render_size, "Image size in pixels");

    auto* t0 = app.add_subcommand("t0", "Estimate the travel-time bound T0");
    t0->add_option("-c,--config", config_path, "Experiment configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return pat::cmd_simulate(pat::parse_config_file(config_path));
    if (rec->parsed())
        return pat::cmd_reconstruct(pat::parse_config_file(config_path), trace_path);
    if (dia->parsed()) return pat::cmd_diagnose(pat::parse_config_file(config_path));
    if (ren->parsed()) return pat::cmd_render(field_path, image_path, render_size, mesh_path);
    if (t0->parsed()) return pat::cmd_t0(pat::parse_config_file(config_path));
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const pat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const pat::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const pat::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
