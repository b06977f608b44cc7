#include <algorithm>
#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "credsim/error.hpp"
#include "credsim/harness.hpp"
#include "text.hpp"

namespace credsim {

namespace {

std::set<std::string> policy_strings(const PolicyConfig& config)
{
    std::set<std::string> out;
    for (const auto& p : config.policies) {
        out.insert(format_policy(p));
    }
    return out;
}

} // namespace

std::string MonotonicityViolation::describe() const
{
    return std::string(to_string(technique)) + ": " + metric + " rises from " + std::to_string(smaller_yield) +
           " under [" + smaller_config + "] to " + std::to_string(larger_yield) + " under [" + larger_config + "]";
}

Scenario cell_scenario(const Scenario& base, TechniqueId technique, const PolicyConfig& config)
{
    Scenario s = base;
    s.name = base.name + "/" + std::string(to_string(technique)) + "/" + config.name;
    s.policies = config.policies;

    // Keep the base binary for this technique if the scenario names one.
    BinaryProfile profile = default_profile(technique);
    for (const auto& spec : base.attacks) {
        if (spec.technique == technique) {
            profile = spec.profile;
            break;
        }
    }
    s.attacks = {AttackSpec{technique, std::move(profile)}};
    return s;
}

OutcomeMatrix build_matrix(const Scenario& base, std::span<const PolicyConfig> configs, unsigned threads)
{
    OutcomeMatrix m;
    m.rows.assign(list_techniques().begin(), list_techniques().end());
    m.columns.assign(configs.begin(), configs.end());
    m.cells.resize(m.rows.size() * m.columns.size());

    const std::size_t total = m.cells.size();
    std::vector<std::optional<std::string>> errors(total);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t row = i / m.columns.size();
            const std::size_t col = i % m.columns.size();
            Report r = run_scenario(cell_scenario(base, m.rows[row], m.columns[col]));
            if (r.error) {
                errors[i] = m.columns[col].name + ": " + *r.error;
            } else if (!r.runs.empty()) {
                m.cells[i] = r.runs.front().outcome;
            }
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    for (const auto& e : errors) {
        if (e) {
            throw Error(Errc::ValidationError, "matrix cell failed: " + *e);
        }
    }
    return m;
}

std::vector<MonotonicityViolation> check_monotonicity(const OutcomeMatrix& matrix)
{
    std::vector<std::set<std::string>> sets;
    for (const auto& c : matrix.columns) {
        sets.push_back(policy_strings(c));
    }

    struct Metric {
        const char* name;
        std::size_t Outcome::*field;
    };
    static constexpr Metric metrics[] = {
        {"plaintext_yield", &Outcome::plaintext_yield},
        {"hash_yield", &Outcome::hash_yield},
        {"credential_yield", &Outcome::credential_yield},
    };

    std::vector<MonotonicityViolation> out;
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = 0; b < sets.size(); ++b) {
            if (a == b || !std::includes(sets[b].begin(), sets[b].end(), sets[a].begin(), sets[a].end())) {
                continue;
            }
            for (std::size_t row = 0; row < matrix.rows.size(); ++row) {
                const Outcome& small = matrix.at(row, a);
                const Outcome& large = matrix.at(row, b);
                for (const auto& metric : metrics) {
                    if (large.*metric.field > small.*metric.field) {
                        out.push_back({matrix.rows[row], matrix.columns[a].name, matrix.columns[b].name, metric.name,
                                       small.*metric.field, large.*metric.field});
                    }
                }
            }
        }
    }
    return out;
}

std::vector<PolicyConfig> parse_configs(std::string_view text, const std::set<std::string>& allowlist)
{
    std::vector<PolicyConfig> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string l(text::trim(raw));
        if (l.empty() || l.front() == '#') {
            continue;
        }
        if (l.front() == '[') {
            if (l.back() != ']' || l.size() < 3) {
                throw Error(Errc::ParseError, "bad config header '" + l + "'", line);
            }
            const std::string name(text::trim(std::string_view(l).substr(1, l.size() - 2)));
            if (std::any_of(out.begin(), out.end(), [&](const auto& c) { return c.name == name; })) {
                throw Error(Errc::ParseError, "duplicate config '" + name + "'", line);
            }
            out.push_back({name, {}});
            continue;
        }
        if (out.empty()) {
            throw Error(Errc::ParseError, "policy line before any [config] header", line);
        }
        try {
            out.back().policies.push_back(parse_policy_line(l, allowlist));
        } catch (const Error& e) {
            throw Error(Errc::ParseError, e.message(), line);
        }
    }
    return out;
}

std::vector<PolicyConfig> combine_configs(std::span<const PolicyConfig> singles, std::size_t max_size)
{
    std::vector<const PolicyConfig*> universe;
    for (const auto& c : singles) {
        if (!c.policies.empty()) {
            universe.push_back(&c);
        }
    }

    std::vector<PolicyConfig> out;
    out.push_back({"none", {}});
    std::vector<std::size_t> pick;
    // Lexicographic subsets of exactly `size` members, one size at a time.
    auto grow = [&](auto& self, std::size_t from, std::size_t size) -> void {
        if (pick.size() == size) {
            PolicyConfig c;
            for (std::size_t k : pick) {
                c.name += (c.name.empty() ? "" : "+") + universe[k]->name;
                c.policies.insert(c.policies.end(), universe[k]->policies.begin(), universe[k]->policies.end());
            }
            out.push_back(std::move(c));
            return;
        }
        for (std::size_t i = from; i < universe.size(); ++i) {
            pick.push_back(i);
            self(self, i + 1, size);
            pick.pop_back();
        }
    };
    for (std::size_t size = 1; size <= std::min(max_size, universe.size()); ++size) {
        grow(grow, 0, size);
    }
    return out;
}

std::string render_matrix(const OutcomeMatrix& matrix, ReportFormat format)
{
    if (format == ReportFormat::Json) {
        using nlohmann::ordered_json;
        ordered_json j;
        j["schema_version"] = kReportSchemaVersion;
        ordered_json cols = ordered_json::array();
        for (const auto& c : matrix.columns) {
            std::vector<std::string> policies;
            for (const auto& p : c.policies) {
                policies.push_back(format_policy(p));
            }
            cols.push_back({{"name", c.name}, {"policies", policies}});
        }
        j["configs"] = std::move(cols);
        ordered_json cells = ordered_json::array();
        for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
            for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
                const Outcome& o = matrix.at(r, c);
                cells.push_back({{"technique", to_string(matrix.rows[r])},
                                 {"config", matrix.columns[c].name},
                                 {"status", o.status},
                                 {"plaintext_yield", o.plaintext_yield},
                                 {"hash_yield", o.hash_yield},
                                 {"credential_yield", o.credential_yield},
                                 {"decoy_hits", o.decoy_hits},
                                 {"events", o.events}});
            }
        }
        j["cells"] = std::move(cells);
        return j.dump(2) + "\n";
    }

    std::size_t width = 6;
    for (const auto& c : matrix.columns) {
        width = std::max(width, c.name.size());
    }
    std::ostringstream out;
    out << std::left << std::setw(20) << "technique" << std::setw(static_cast<int>(width) + 2) << "config"
        << std::setw(28) << "status" << "plain hash decoy events\n";
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
            const Outcome& o = matrix.at(r, c);
            out << std::setw(20) << to_string(matrix.rows[r]) << std::setw(static_cast<int>(width) + 2)
                << matrix.columns[c].name << std::setw(28) << o.status << std::setw(6) << o.plaintext_yield
                << std::setw(5) << o.hash_yield << std::setw(6) << o.decoy_hits << o.events << "\n";
        }
    }
    return out.str();
}

} // namespace credsim
