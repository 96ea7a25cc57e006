#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bck/csv.hpp"
#include "bck/scenario.hpp"

namespace bck {

namespace detail {

struct Section {
    int line = 0;
    std::map<std::string, std::pair<std::string, int>> keys;  // key -> (value, line)
};

inline Error parse_error(int line, const std::string& msg) {
    return Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

inline std::map<std::string, Section> split_sections(std::string_view text) {
    static const std::set<std::string> known = {"scenario", "omega",  "damping", "force",
                                                "beta0",    "grid",   "integrator"};
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    std::string current_name;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw parse_error(line_no, "unterminated section header");
            std::string name(trim(line.substr(1, line.size() - 2)));
            if (!known.contains(name)) throw parse_error(line_no, "unknown section [" + name + "]");
            if (sections.contains(name)) throw parse_error(line_no, "duplicate section [" + name + "]");
            current = &sections[name];
            current->line = line_no;
            current_name = name;
            continue;
        }
        if (!current) throw parse_error(line_no, "key outside of any section");
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw parse_error(line_no, "expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw parse_error(line_no, "empty key");
        if (value.empty()) throw parse_error(line_no, "empty value for key '" + key + "'");
        if (current->keys.contains(key)) {
            throw parse_error(line_no, "duplicate key '" + key + "' in [" + current_name + "]");
        }
        current->keys[key] = {value, line_no};
    }
    return sections;
}

class SectionReader {
public:
    SectionReader(const Section& s, std::string name) : s_(s), name_(std::move(name)) {}

    bool has(const std::string& key) const { return s_.keys.contains(key); }

    double number(const std::string& key) {
        used_.insert(key);
        auto it = s_.keys.find(key);
        if (it == s_.keys.end()) throw parse_error(s_.line, "[" + name_ + "] missing key '" + key + "'");
        auto v = parse_number(it->second.first);
        if (!v) {
            throw parse_error(it->second.second, "[" + name_ + "] key '" + key + "': not a number: '" +
                                                     it->second.first + "'");
        }
        return *v;
    }

    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::string text(const std::string& key) {
        used_.insert(key);
        auto it = s_.keys.find(key);
        if (it == s_.keys.end()) throw parse_error(s_.line, "[" + name_ + "] missing key '" + key + "'");
        return it->second.first;
    }

    void finish() const {
        for (const auto& [key, v] : s_.keys) {
            if (!used_.contains(key)) throw parse_error(v.second, "[" + name_ + "] unknown key '" + key + "'");
        }
    }

private:
    const Section& s_;
    std::string name_;
    std::set<std::string> used_;
};

inline TimeFunction read_tabulated_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open tabulated file '" + path.string() + "'");
    std::vector<double> t, y;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected t,value");
        }
        auto a = parse_number(trim(line.substr(0, comma)));
        auto b = parse_number(trim(line.substr(comma + 1)));
        if (!a || !b) {
            if (t.empty() && line_no == 1) continue;  // header row
            throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad number");
        }
        t.push_back(*a);
        y.push_back(*b);
    }
    return TimeFunction::tabulated(std::move(t), std::move(y), path.string());
}

inline TimeFunction read_function(const Section& sec, const std::string& name,
                                  const std::filesystem::path& base_dir) {
    SectionReader r(sec, name);
    const std::string type = r.text("type");
    TimeFunction f;
    if (type == "constant") {
        f = Constant{r.number("value")};
    } else if (type == "linear") {
        f = Linear{r.number("a"), r.number("b")};
    } else if (type == "sinusoid") {
        f = Sinusoid{r.number("amplitude"), r.number("frequency"), r.number_or("phase", 0.0)};
    } else if (type == "exponential") {
        f = Exponential{r.number("amplitude"), r.number("rate")};
    } else if (type == "tabulated") {
        std::filesystem::path p = r.text("file");
        const auto resolved = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        auto tab = read_tabulated_csv(resolved);
        // keep the path as written so serialization round-trips
        auto spline = std::get<Tabulated>(tab.variant()).spline;
        f = Tabulated{spline, p.string()};
    } else {
        throw parse_error(sec.keys.at("type").second, "[" + name + "] unknown function type '" + type + "'");
    }
    r.finish();
    return f;
}

inline void write_function(std::ostream& out, const std::string& name, const TimeFunction& f) {
    out << '[' << name << "]\n";
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Constant>) {
                out << "type = constant\nvalue = " << format_number(v.value) << '\n';
            } else if constexpr (std::is_same_v<T, Linear>) {
                out << "type = linear\na = " << format_number(v.a) << "\nb = " << format_number(v.b) << '\n';
            } else if constexpr (std::is_same_v<T, Sinusoid>) {
                out << "type = sinusoid\namplitude = " << format_number(v.amplitude)
                    << "\nfrequency = " << format_number(v.frequency) << "\nphase = " << format_number(v.phase)
                    << '\n';
            } else if constexpr (std::is_same_v<T, Exponential>) {
                out << "type = exponential\namplitude = " << format_number(v.amplitude)
                    << "\nrate = " << format_number(v.rate) << '\n';
            } else {
                if (v.source.empty()) {
                    throw Error(ErrorKind::ValidationError,
                                "cannot serialize a tabulated function that was not read from a file");
                }
                out << "type = tabulated\nfile = " << v.source << '\n';
            }
        },
        f.variant());
    out << '\n';
}

}  // namespace detail

/// Parses and validates a scenario document. Relative tabulated paths resolve against `base_dir`.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {}) {
    using namespace detail;
    const auto sections = split_sections(text);
    Scenario s;

    auto sc = sections.find("scenario");
    if (sc == sections.end()) throw Error(ErrorKind::ParseError, "missing [scenario] section");
    {
        SectionReader r(sc->second, "scenario");
        s.m = r.number_or("m", 1.0);
        s.hbar = r.number_or("hbar", 1.0);
        s.t0 = r.number("t0");
        s.t1 = r.number("t1");
        r.finish();
    }
    auto om = sections.find("omega");
    if (om == sections.end()) throw Error(ErrorKind::ParseError, "missing [omega] section");
    s.omega = read_function(om->second, "omega", base_dir);
    if (auto it = sections.find("damping"); it != sections.end()) s.damping = read_function(it->second, "damping", base_dir);
    if (auto it = sections.find("force"); it != sections.end()) s.force = read_function(it->second, "force", base_dir);

    if (auto it = sections.find("beta0"); it != sections.end()) {
        SectionReader r(it->second, "beta0");
        BetaInitial b;
        b.beta = {r.number("re"), r.number_or("im", 0.0)};
        b.beta_dot = {r.number_or("dre", 0.0), r.number_or("dim", 0.0)};
        r.finish();
        s.beta0 = b;
    }
    if (auto it = sections.find("grid"); it != sections.end()) {
        SectionReader r(it->second, "grid");
        s.grid.qmin = r.number_or("qmin", s.grid.qmin);
        s.grid.qmax = r.number_or("qmax", s.grid.qmax);
        const double n = r.number_or("npoints", s.grid.npoints);
        if (n != std::floor(n) || n > 1e8) {
            throw parse_error(it->second.keys.at("npoints").second, "[grid] npoints must be an integer");
        }
        s.grid.npoints = static_cast<int>(n);
        r.finish();
    }
    if (auto it = sections.find("integrator"); it != sections.end()) {
        SectionReader r(it->second, "integrator");
        s.integrator.rtol = r.number_or("rtol", s.integrator.rtol);
        s.integrator.atol = r.number_or("atol", s.integrator.atol);
        s.integrator.max_step = r.number_or("max_step", 0.0);
        r.finish();
    }
    s.validate();
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open scenario file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.parent_path());
}

inline std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "[scenario]\nm = " << format_number(s.m) << "\nhbar = " << format_number(s.hbar)
        << "\nt0 = " << format_number(s.t0) << "\nt1 = " << format_number(s.t1) << "\n\n";
    detail::write_function(out, "omega", s.omega);
    detail::write_function(out, "damping", s.damping);
    detail::write_function(out, "force", s.force);
    if (s.beta0) {
        out << "[beta0]\nre = " << format_number(s.beta0->beta.real()) << "\nim = " << format_number(s.beta0->beta.imag())
            << "\ndre = " << format_number(s.beta0->beta_dot.real())
            << "\ndim = " << format_number(s.beta0->beta_dot.imag()) << "\n\n";
    }
    out << "[grid]\nqmin = " << format_number(s.grid.qmin) << "\nqmax = " << format_number(s.grid.qmax)
        << "\nnpoints = " << s.grid.npoints << "\n\n";
    out << "[integrator]\nrtol = " << format_number(s.integrator.rtol) << "\natol = " << format_number(s.integrator.atol)
        << "\nmax_step = " << format_number(s.resolved_max_step()) << '\n';
    return out.str();
}

}  // namespace bck
