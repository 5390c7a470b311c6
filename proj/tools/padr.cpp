#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "padr/commands.hpp"
#include "padr/io.hpp"
#include "padr/kernel.hpp"

namespace {

int report(const char* kind, const std::string& message, int code) {
    std::cerr << padr::JsonObject().add("error", kind).add("message", message).add("exit_code", code).str()
              << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-adic reaction-ultradiffusion toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool dense = false;
    for (const char* name : {"validate", "simulate", "stationary", "spectrum", "converge"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "JSON configuration file")->required();
        sub->add_option("-o,--out", out_dir, "Output directory (overrides outputs.directory)");
        if (std::string(name) == "spectrum")
            sub->add_flag("--dense", dense, "Also write the dense operator as CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : padr::kExitUsage;
    }

    try {
        padr::RunConfig cfg = padr::load_config(config_path);
        if (!out_dir.empty()) cfg.outputs.directory = out_dir;
        return padr::run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, dense);
    } catch (const padr::ConfigError& e) {
        return report("config", e.what(), padr::kExitUsage);
    } catch (const std::invalid_argument& e) {
        return report("config", e.what(), padr::kExitUsage);
    } catch (const padr::HypothesisError& e) {
        return report("hypothesis", e.what(), padr::kExitHypothesis);
    } catch (const padr::KernelError& e) {
        return report("kernel", e.what(), padr::kExitHypothesis);
    } catch (const padr::AbortError& e) {
        return report("abort", e.what(), padr::kExitAbort);
    } catch (const std::exception& e) {
        return report("runtime", e.what(), padr::kExitAbort);
    }
}
