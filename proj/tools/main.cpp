#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bec/cli.hpp"
#include "bec/errors.hpp"
#include "bec/io.hpp"
#include "bec/parallel.hpp"

namespace fs = std::filesystem;
using namespace bec;

int main(int argc, char** argv) {
    CLI::App app{"Finite-volume and limit computations for the diagonal Bose-gas model.\n"
                 "Commands: sweep, solve-mu, genfun, condense, kac-check, equiv, scaling, positivity\n"
                 "(chosen by the \"command\" field of the config)."};
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    app.add_option("--config", config_path, "JSON config (schema \"v1\")")->required();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads; affects wall time only")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    app.footer(cli::columns_help());
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kExitOk : cli::kExitValidation;
    }
    set_thread_count(threads);

    cli::RunConfig config;
    try {
        std::ifstream in(config_path);
        if (!in) throw cli::ConfigError("config: cannot read " + config_path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw cli::ConfigError(std::string("config: not valid JSON: ") + e.what());
        }
        config = cli::parse_config(doc);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitValidation;
    }

    std::vector<cli::Artifact> files;
    try {
        files = cli::run(config, std::cerr);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitValidation;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitValidation;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return cli::kExitNumeric;
    }

    try {
        fs::create_directories(out_dir);
        for (const auto& f : files) {
            io::write_atomic(fs::path(out_dir) / f.filename, f.content);
            std::cerr << "wrote " << (fs::path(out_dir) / f.filename).string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return cli::kExitOk;
}
