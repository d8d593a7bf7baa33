#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chains/pipeline.hpp"

int main(int argc, char** argv) {
    chains::RunConfig cfg;
    if (const char* env = std::getenv("CHAINS_OUTPUT_DIR"))
        cfg.output_dir = env;

    // config file first, so that explicit flags win on conflict
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        std::string path;
        if (a == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0)
            path = a.substr(9);
        if (!path.empty()) {
            try {
                cfg = chains::load_config_file(path);
            } catch (const chains::ChainError& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{
        "Constructs cyclic-symmetric SU(2) monopole chains: classifies the "
        "symmetric spectral data, solves the affine Toda system on the "
        "cylinder, and runs the numerical Nahm transform to produce "
        "energy-density grids."};
    std::string config_path, stages = chains::join_set(cfg.stages),
                             formats = chains::join_set(cfg.formats);
    app.add_option("--config", config_path, "JSON config file; flags win on conflict");
    app.add_option("--k", cfg.k, "charge (positive integer)");
    app.add_option("--l", cfg.l, "symmetry label, reduced mod k");
    app.add_option("--c-abs", cfg.c_abs, "|c| > 0");
    app.add_option("--c-phase", cfg.c_phase, "phase of c in radians");
    app.add_option("--beta", cfg.beta, "circle circumference parameter");
    app.add_option("--domain-L", cfg.domain_L, "cylinder half-length (0: max(6,3k)/beta)");
    app.add_option("--grid-nr", cfg.grid_nr, "grid points along x1 (even)");
    app.add_option("--grid-nt", cfg.grid_nt, "grid points along x2 (even)");
    app.add_option("--tol", cfg.tol, "Toda residual tolerance");
    app.add_option("--max-steps", cfg.max_steps, "flow step budget");
    app.add_option("--y-extent", cfg.y_extent, "half-width of the y1,y2 window (0: 3k/beta)");
    app.add_option("--y-points", cfg.y_points, "lattice points per y1,y2 axis");
    app.add_option("--y3-points", cfg.y3_points, "lattice points along y3");
    app.add_option("--stages", stages, "subset of spectral,toda,nahm (comma separated)");
    app.add_option("--output-dir", cfg.output_dir,
                   "artifact directory (default $CHAINS_OUTPUT_DIR or .)");
    app.add_option("--format", formats, "subset of csv,vtk,json (comma separated)");
    app.add_option("--threads", cfg.threads, "scan worker threads (0: hardware)");
    app.add_option("--seed", cfg.seed, "seed for randomized eigensolver starts");
    app.add_flag("--checkpoint", cfg.checkpoint, "read/write the psi checkpoint file");
    CLI11_PARSE(app, argc, argv);

    cfg.stages = chains::split_set(stages);
    cfg.formats = chains::split_set(formats);
    return chains::run(cfg, std::cout);
}
