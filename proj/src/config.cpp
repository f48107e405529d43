/*
   Copyright 2026 The ldlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "ldlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ldlab/errors.hpp"

namespace ldlab::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <class T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    return os.str();
}

// Typed access to one section; remembers which keys were consumed.
class SectionReader {
public:
    SectionReader(const IniDocument& doc, std::string section)
        : doc_(doc), section_(std::move(section)) {}

    template <class T>
    void read(const std::string& key, T& out) {
        used_.insert(key);
        if (const auto* e = doc_.find(section_, key)) out = convert<T>(*e, key);
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out) {
        used_.insert(key);
        const auto* e = doc_.find(section_, key);
        if (!e) return;
        if (e->value == "auto" || e->value.empty()) {
            out.reset();
        } else {
            out = convert<T>(*e, key);
        }
    }

    template <class T>
    void read(const std::string& key, std::vector<T>& out) {
        used_.insert(key);
        const auto* e = doc_.find(section_, key);
        if (!e) return;
        out.clear();
        for (const auto& item : split_list(e->value)) out.push_back(convert<T>({item, e->origin}, key));
        if (out.empty()) fail(*e, key, "list must not be empty");
    }

    [[noreturn]] void fail(const IniEntry& e, const std::string& key, const std::string& msg) const {
        throw ConfigError(e.origin + " [" + section_ + "] " + key, msg);
    }

    void fail_if(bool bad, const std::string& key, const std::string& msg) const {
        if (!bad) return;
        const auto* e = doc_.find(section_, key);
        throw ConfigError((e ? e->origin + " " : std::string()) + "[" + section_ + "] " + key, msg);
    }

    void reject_unknown() const {
        const auto& secs = doc_.sections();
        const auto it = secs.find(section_);
        if (it == secs.end()) return;
        for (const auto& [key, entry] : it->second) {
            if (!used_.count(key)) fail(entry, key, "unknown key");
        }
    }

private:
    template <class T>
    T convert(const IniEntry& e, const std::string& key) const {
        const std::string& v = e.value;
        if constexpr (std::is_same_v<T, std::string>) {
            return v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
            if (v == "false" || v == "0" || v == "no" || v == "off") return false;
            fail(e, key, "expected a boolean, got '" + v + "'");
        } else {
            T out{};
            const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
            if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
                fail(e, key, "cannot parse '" + v + "'");
            }
            return out;
        }
    }

    const IniDocument& doc_;
    std::string section_;
    std::set<std::string> used_;
};

}  // namespace

IniDocument IniDocument::parse(std::istream& is, const std::string& source) {
    IniDocument doc;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (text.empty()) continue;
        const std::string origin = source + ":" + std::to_string(lineno);
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(origin, "unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            if (section.empty()) throw ConfigError(origin, "empty section name");
            doc.sections_[section];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(origin, "expected 'key = value'");
        if (section.empty()) throw ConfigError(origin, "key outside of any [section]");
        const std::string key = trim(text.substr(0, eq));
        if (key.empty()) throw ConfigError(origin, "empty key");
        doc.set(section, key, trim(text.substr(eq + 1)), origin);
    }
    return doc;
}

IniDocument IniDocument::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open configuration file");
    return parse(in, path);
}

void IniDocument::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("--set " + assignment, "expected section.key=value");
    }
    set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
        trim(assignment.substr(eq + 1)), "--set");
}

void IniDocument::set(const std::string& section, const std::string& key, const std::string& value,
                      const std::string& origin) {
    sections_[section][key] = {value, origin};
}

const IniEntry* IniDocument::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

std::string IniDocument::to_text() const {
    std::ostringstream os;
    for (const auto& [section, keys] : sections_) {
        os << '[' << section << "]\n";
        for (const auto& [key, entry] : keys) os << key << " = " << entry.value << '\n';
    }
    return os.str();
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    os << "[run]\nseed = " << run.seed << "\nworkers = " << run.workers << "\n\n";
    os << "[map]\nkind = " << map.kind << "\ngamma = " << fmt(map.gamma)
       << "\na0 = " << (map.a0 ? fmt(*map.a0) : std::string("auto")) << "\nalpha = " << fmt(map.alpha)
       << "\nd = " << map.d << "\n\n";
    os << "[observable]\nkind = " << observable.kind << "\nvalue = " << fmt(observable.value)
       << "\nplateau_lo = " << fmt(observable.plateau_lo) << "\nplateau_hi = "
       << fmt(observable.plateau_hi) << "\nramp = " << fmt(observable.ramp)
       << "\nholder = " << fmt(observable.holder) << "\ncenter = " << observable.center
       << "\ncenter_budget = " << observable.center_budget << "\n\n";
    os << "[ulam]\nbins = " << ulam.bins << "\nn_max = " << ulam.n_max
       << "\nrefine = " << (ulam.refine ? "true" : "false")
       << "\ndump_matrix = " << (ulam.dump_matrix ? "true" : "false") << "\n\n";
    os << "[fit]\nn_min = " << fit.n_min << "\nn_max = " << fit.n_max << "\n\n";
    os << "[ld]\nn = " << join(ld.n) << "\nepsilon = " << join(ld.epsilon)
       << "\nsamples = " << ld.samples << "\nburn_in = " << ld.burn_in << "\n\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("auto"); };
    os << "[verify]\ntheta = " << opt(verify.theta) << "\ntau = " << opt(verify.tau)
       << "\nc_phi = " << opt(verify.c_phi) << "\ndecay_manifest = " << verify.decay_manifest
       << "\ncalibration_samples = " << verify.calibration_samples
       << "\ncalibration_q = " << join(verify.calibration_q)
       << "\ncalibration_n = " << join(verify.calibration_n)
       << "\nheldout_q = " << fmt(verify.heldout_q) << "\nheldout_n = " << verify.heldout_n
       << "\nexp_n = " << join(verify.exp_n) << "\nexp_samples = " << verify.exp_samples
       << "\ntau_prime_scale = " << fmt(verify.tau_prime_scale)
       << "\ngordin_target = " << fmt(verify.gordin_target)
       << "\ngordin_cap = " << verify.gordin_cap
       << "\nnoise_floor_tau = " << fmt(verify.noise_floor_tau) << "\n";
    return os.str();
}

ExperimentConfig resolve(const IniDocument& doc) {
    static const std::set<std::string> kSections = {"run", "map", "observable", "ulam",
                                                    "fit", "ld",  "verify"};
    for (const auto& [name, keys] : doc.sections()) {
        if (!kSections.count(name)) {
            const std::string origin = keys.empty() ? std::string() : keys.begin()->second.origin + " ";
            throw ConfigError(origin + "[" + name + "]", "unknown section");
        }
    }

    ExperimentConfig cfg;
    {
        SectionReader r(doc, "run");
        r.read("seed", cfg.run.seed);
        r.read("workers", cfg.run.workers);
        r.fail_if(cfg.run.workers < 0, "workers", "must be >= 0");
        r.reject_unknown();
    }
    {
        SectionReader r(doc, "map");
        auto& m = cfg.map;
        r.read("kind", m.kind);
        r.read("gamma", m.gamma);
        r.read("a0", m.a0);
        r.read("alpha", m.alpha);
        r.read("d", m.d);
        r.fail_if(m.kind != "intermittent" && m.kind != "doubling" && m.kind != "viana", "kind",
                  "expected intermittent, doubling or viana, got '" + m.kind + "'");
        r.fail_if(!(m.gamma > 0.0 && m.gamma <= 1.0), "gamma",
                  "gamma = " + fmt(m.gamma) +
                      " violates the constraint \u03b8 \u2208 (0,1] (the decay exponent \u03b8 is gamma)");
        r.fail_if(m.a0 && !(*m.a0 > 1.0 && *m.a0 < 2.0), "a0", "a0 must lie in (1,2)");
        r.fail_if(!(m.alpha > 0.0), "alpha", "alpha must be > 0");
        r.fail_if(m.d < 2, "d", "d must be an integer >= 2");
        r.reject_unknown();
    }
    {
        SectionReader r(doc, "observable");
        auto& o = cfg.observable;
        r.read("kind", o.kind);
        r.read("value", o.value);
        r.read("plateau_lo", o.plateau_lo);
        r.read("plateau_hi", o.plateau_hi);
        r.read("ramp", o.ramp);
        r.read("holder", o.holder);
        r.read("center", o.center);
        r.read("center_budget", o.center_budget);
        static const std::set<std::string> kinds = {"cosine", "coordinate", "bump", "viana_fiber",
                                                    "constant"};
        r.fail_if(!kinds.count(o.kind), "kind", "unknown observable kind '" + o.kind + "'");
        r.fail_if(!(o.plateau_lo <= o.plateau_hi), "plateau_hi", "plateau_hi must be >= plateau_lo");
        r.fail_if(!(o.ramp > 0.0), "ramp", "ramp must be > 0");
        r.fail_if(!(o.holder > 0.0 && o.holder <= 1.0), "holder", "Holder exponent must lie in (0,1]");
        static const std::set<std::string> centers = {"auto", "ulam_density", "long_orbit", "none"};
        r.fail_if(!centers.count(o.center), "center",
                  "expected auto, ulam_density, long_orbit or none");
        r.fail_if(o.center_budget != 0 && o.center_budget < 1000, "center_budget",
                  "must be 0 (auto) or >= 1000");
        r.reject_unknown();
    }
    {
        SectionReader r(doc, "ulam");
        auto& u = cfg.ulam;
        r.read("bins", u.bins);
        r.read("n_max", u.n_max);
        r.read("refine", u.refine);
        r.read("dump_matrix", u.dump_matrix);
        r.fail_if(u.bins < 16 || (u.bins & (u.bins - 1)) != 0, "bins", "must be a power of two >= 16");
        r.fail_if(u.n_max < 4, "n_max", "must be >= 4");
        r.reject_unknown();
    }
    {
        SectionReader r(doc, "fit");
        r.read("n_min", cfg.fit.n_min);
        r.read("n_max", cfg.fit.n_max);
        r.reject_unknown();
    }
    {
        SectionReader r(doc, "ld");
        auto& l = cfg.ld;
        r.read("n", l.n);
        r.read("epsilon", l.epsilon);
        r.read("samples", l.samples);
        r.read("burn_in", l.burn_in);
        r.fail_if(std::any_of(l.n.begin(), l.n.end(), [](std::size_t v) { return v < 1; }), "n",
                  "every n must be >= 1");
        r.fail_if(std::any_of(l.epsilon.begin(), l.epsilon.end(), [](double v) { return !(v > 0.0); }),
                  "epsilon", "every epsilon must be > 0");
        r.fail_if(l.samples < 100, "samples", "must be >= 100");
        r.fail_if(l.burn_in < 1000, "burn_in", "must be >= 1000");
        r.reject_unknown();
    }
    {
        SectionReader r(doc, "verify");
        auto& v = cfg.verify;
        r.read("theta", v.theta);
        r.read("tau", v.tau);
        r.read("c_phi", v.c_phi);
        r.read("decay_manifest", v.decay_manifest);
        r.read("calibration_samples", v.calibration_samples);
        r.read("calibration_q", v.calibration_q);
        r.read("calibration_n", v.calibration_n);
        r.read("heldout_q", v.heldout_q);
        r.read("heldout_n", v.heldout_n);
        r.read("exp_n", v.exp_n);
        r.read("exp_samples", v.exp_samples);
        r.read("tau_prime_scale", v.tau_prime_scale);
        r.read("gordin_target", v.gordin_target);
        r.read("gordin_cap", v.gordin_cap);
        r.read("noise_floor_tau", v.noise_floor_tau);
        r.fail_if(v.theta && !(*v.theta > 0.0 && *v.theta <= 1.0), "theta",
                  "theta must lie in (0,1]");
        r.fail_if(v.tau && !(*v.tau > 0.0), "tau", "tau must be > 0");
        r.fail_if(v.c_phi && !(*v.c_phi > 0.0), "c_phi", "c_phi must be > 0");
        r.fail_if(v.theta.has_value() != v.tau.has_value(), "theta",
                  "synthetic constants need both theta and tau");
        r.fail_if(v.calibration_samples < 100, "calibration_samples", "must be >= 100");
        r.fail_if(v.exp_samples < 100, "exp_samples", "must be >= 100");
        r.fail_if(std::any_of(v.calibration_q.begin(), v.calibration_q.end(),
                              [](double q) { return !(q > 0.0); }),
                  "calibration_q", "every q must be > 0");
        r.fail_if(std::any_of(v.calibration_n.begin(), v.calibration_n.end(),
                              [](std::size_t n) { return n < 1; }),
                  "calibration_n", "every n must be >= 1");
        r.fail_if(!(v.tau_prime_scale > 0.0), "tau_prime_scale", "must be > 0");
        r.reject_unknown();
    }
    return cfg;
}

maps::MapSystem make_map(const MapConfig& cfg) {
    if (cfg.kind == "doubling") return maps::MapSystem::doubling();
    if (cfg.kind == "viana") {
        maps::VianaParams p;
        p.a0 = cfg.a0 ? *cfg.a0 : maps::misiurewicz_a0();
        p.alpha = cfg.alpha;
        p.d = cfg.d;
        return maps::MapSystem::viana(p);
    }
    return maps::MapSystem::intermittent(cfg.gamma);
}

maps::Observable make_observable(const ObservableConfig& cfg) {
    maps::Observable o;
    if (cfg.kind == "cosine") o = maps::Observable::cosine();
    if (cfg.kind == "coordinate") o = maps::Observable::coordinate();
    if (cfg.kind == "viana_fiber") o = maps::Observable::viana_fiber();
    if (cfg.kind == "constant") o = maps::Observable::constant(cfg.value);
    if (cfg.kind == "bump") {
        o = maps::Observable::bump();
        o.plateau_lo = cfg.plateau_lo;
        o.plateau_hi = cfg.plateau_hi;
        o.ramp = cfg.ramp;
        o.holder = cfg.holder;
    }
    return o;
}

mc::SampleSpec ld_sample_spec(const ExperimentConfig& cfg) {
    mc::SampleSpec spec;
    spec.samples = cfg.ld.samples;
    spec.burn_in = cfg.ld.burn_in;
    spec.seed = cfg.run.seed;
    spec.workers = cfg.run.workers;
    return spec;
}

}  // namespace ldlab::cli
