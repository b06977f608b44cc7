#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "credsim/error.hpp"
#include "credsim/harness.hpp"

namespace {

using namespace credsim;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRunFailed = 2;
constexpr int kIo = 3;

int exit_code_for(Errc code)
{
    switch (code) {
    case Errc::Io: return kIo;
    case Errc::ParseError:
    case Errc::ValidationError:
    case Errc::UnknownFormat:
    case Errc::UnknownTechnique:
    case Errc::DuplicatePolicy: return kInvalid;
    default: return kRunFailed;
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::Io, "cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& output)
{
    if (output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output, std::ios::binary);
    if (!out || !(out << text)) {
        throw Error(Errc::Io, "cannot write " + output);
    }
}

ReportFormat format_or_throw(const std::string& name)
{
    auto f = report_format_from_string(name);
    if (!f) {
        throw Error(Errc::UnknownFormat, "unknown report format '" + name + "'");
    }
    return *f;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"credsim: LSASS credential dumping simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string format = "text";
    std::string output;
    std::string configs_path;
    std::size_t combine = 1;
    unsigned threads = 0;
    std::string list_what;

    auto* run = app.add_subcommand("run", "run a scenario and print its report");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--format", format, "text or json");
    run->add_option("--output", output, "write the report here instead of stdout");

    auto* matrix = app.add_subcommand("matrix", "run every technique under every policy config");
    matrix->add_option("scenario", scenario_path, "base scenario file")->required();
    matrix->add_option("--configs", configs_path, "policy config file")->required();
    matrix->add_option("--combine", combine, "also run all unions of up to N single-policy configs")
        ->check(CLI::Range(1, 12));
    matrix->add_option("--threads", threads, "worker threads, 0 = all cores");
    matrix->add_option("--format", format, "text or json");
    matrix->add_option("--output", output, "write the matrix here instead of stdout");

    auto* list = app.add_subcommand("list", "list techniques or defenses");
    list->add_option("what", list_what, "techniques | defenses")
        ->required()
        ->check(CLI::IsMember({"techniques", "defenses"}));

    auto* check = app.add_subcommand("check", "parse and validate a scenario");
    check->add_option("scenario", scenario_path, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*list) {
            if (list_what == "techniques") {
                for (TechniqueId t : list_techniques()) {
                    std::cout << to_string(t) << "\n";
                }
            } else {
                for (auto keyword : policy_keywords()) {
                    std::cout << keyword << "\n";
                }
            }
            return kOk;
        }

        const Scenario scenario = parse_scenario(read_file(scenario_path));

        if (*check) {
            std::cout << scenario.name << ": ok (" << scenario.attacks.size() << " attacks, "
                      << scenario.policies.size() << " policies)\n";
            return kOk;
        }

        if (*run) {
            const ReportFormat f = format_or_throw(format);
            const Report report = run_scenario(scenario);
            emit(render_report(report, f), output);
            if (report.error) {
                std::cerr << "run failed: " << *report.error << "\n";
            }
            for (const auto& v : report.violations) {
                std::cerr << "invariant violated: " << v << "\n";
            }
            return report.ok() ? kOk : kRunFailed;
        }

        const ReportFormat f = format_or_throw(format);
        std::vector<PolicyConfig> configs = parse_configs(read_file(configs_path), scenario.allowlist);
        if (combine > 1) {
            configs = combine_configs(configs, combine);
        }
        const OutcomeMatrix m = build_matrix(scenario, configs, threads);
        emit(render_matrix(m, f), output);
        const auto violations = check_monotonicity(m);
        for (const auto& v : violations) {
            std::cerr << "monotonicity: " << v.describe() << "\n";
        }
        return violations.empty() ? kOk : kRunFailed;
    } catch (const Error& e) {
        std::cerr << "credsim: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
}
