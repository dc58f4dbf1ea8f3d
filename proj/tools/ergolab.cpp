// Command-line front end: `ergolab run <config> ...` and `ergolab presets`.
//
// Exit codes: 0 success, 2 invalid config or input, 3 numerical domain
// error, 4 an --assert expectation was not met.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ergolab/averages.hpp"
#include "ergolab/dynsys.hpp"
#include "ergolab/experiment.hpp"
#include "ergolab/expr.hpp"

namespace {

int run(const std::string& config_path, const std::vector<std::string>& sets, const std::string& assert_path,
        int threads, const std::string& out_dir, bool timing) {
    using namespace ergolab;
    if (threads > 0) set_thread_count(threads);
    Json config = load_config(config_path);
    for (const auto& s : sets) apply_override(config, s);
    const ExperimentResult result = run_experiment(config);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    const std::string csv = write_outputs(result, out_dir, timing);
    std::cout << csv << '\n';
    if (assert_path.empty()) return 0;

    std::ifstream in(assert_path);
    if (!in) throw ConfigError("cannot read expectations '" + assert_path + "'");
    const Json expectations = Json::parse(in);
    const AssertOutcome outcome = check_expectations(result, expectations);
    for (const auto& m : outcome.messages) std::cout << m << '\n';
    return outcome.ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergolab: double ergodic averages along fractional-power sequences"};
    app.require_subcommand(1);

    std::string config_path, assert_path, out_dir = ".";
    std::vector<std::string> sets;
    int threads = 0;
    bool timing = false;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment config, sidecar or preset name");
    run_cmd->add_option("config", config_path, "config JSON, sidecar JSON or preset name")->required();
    run_cmd->add_option("--set", sets, "override key=value (dotted keys allowed)");
    run_cmd->add_option("--assert", assert_path, "expectations JSON; exit 4 on mismatch");
    run_cmd->add_option("--threads", threads, "worker threads (default ERGOLAB_THREADS or 1)")
        ->check(CLI::Range(1, 1024));
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--timing", timing, "record wall time in the CSV ms column");

    auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");

    CLI11_PARSE(app, argc, argv);

    if (presets_cmd->parsed()) {
        for (const auto& [name, text] : ergolab::preset_catalog()) std::cout << name << '\n';
        return 0;
    }
    try {
        return run(config_path, sets, assert_path, threads, out_dir, timing);
    } catch (const ergolab::ScopeError& e) {
        std::cerr << "scope error: " << e.what() << '\n';
        return 2;
    } catch (const ergolab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ergolab::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ergolab::TypeError& e) {
        std::cerr << "type error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ergolab::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
