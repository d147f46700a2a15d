#include "vbs/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vbs {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::invalid_argument("config: key '" + key + "' has non-numeric value '" + s + "'");
    }
    return v;
}

}  // namespace

KvMap parse_ini(std::istream& in) {
    KvMap kv;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": malformed section");
            }
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty section name");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        }
        kv[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

KvMap parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse_ini(in);
}

void apply_override(KvMap& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must have the form section.key=value: " + assignment);
    }
    kv[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

double kv_double(const KvMap& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_double(it->second, key);
}

int kv_int(const KvMap& kv, const std::string& key, int fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    int v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size()) {
        throw std::invalid_argument("config: key '" + key + "' has non-integer value '" + it->second + "'");
    }
    return v;
}

bool kv_bool(const KvMap& kv, const std::string& key, bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: key '" + key + "' has non-boolean value '" + v + "'");
}

std::string kv_str(const KvMap& kv, const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(csv);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

Method method_from_name(const std::string& name) {
    if (name == "vbs") return Method::Vbs;
    if (name == "vgs") return Method::Vgs;
    if (name == "shy_vgs") return Method::ShyVgs;
    if (name == "bocd") return Method::Bocd;
    if (name == "bf") return Method::Bf;
    if (name == "vcl") return Method::Vcl;
    if (name == "lp") return Method::Lp;
    if (name == "independent") return Method::Independent;
    throw std::invalid_argument("unknown method: " + name);
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Vbs: return "vbs";
        case Method::Vgs: return "vgs";
        case Method::ShyVgs: return "shy_vgs";
        case Method::Bocd: return "bocd";
        case Method::Bf: return "bf";
        case Method::Vcl: return "vcl";
        case Method::Lp: return "lp";
        case Method::Independent: return "independent";
    }
    return "vcl";
}

RunConfig RunConfig::from_kv(const KvMap& kv) {
    RunConfig cfg;
    cfg.echo = kv;

    // [stream]
    cfg.stream.kind = stream_kind_from_name(kv_str(kv, "stream.kind", "step_mean"));
    cfg.stream.seed = static_cast<uint64_t>(kv_int(kv, "stream.seed", 0));
    static const std::set<std::string> non_param_keys = {
        "stream.kind",        "stream.seed",          "stream.path",
        "stream.feature_cols", "stream.target_cols",  "stream.prob_target",
        "stream.lo_fill",      "stream.hi_fill",      "stream.standardize",
        "stream.validation_prefix"};
    for (const auto& [key, value] : kv) {
        if (key.rfind("stream.", 0) == 0 && non_param_keys.find(key) == non_param_keys.end()) {
            cfg.stream.params[key.substr(7)] = parse_double(value, key);
        }
    }
    if (cfg.stream.kind == StreamKind::CsvFile) {
        cfg.stream.csv_path = kv_str(kv, "stream.path", "");
        if (cfg.stream.csv_path.empty()) throw std::invalid_argument("config: csv stream needs stream.path");
        cfg.stream.schema.feature_cols = split_list(kv_str(kv, "stream.feature_cols", ""));
        cfg.stream.schema.target_cols = split_list(kv_str(kv, "stream.target_cols", ""));
        cfg.stream.schema.prob_target = kv_bool(kv, "stream.prob_target", false);
        cfg.stream.schema.lo_fill = kv_double(kv, "stream.lo_fill", -4.0);
        cfg.stream.schema.hi_fill = kv_double(kv, "stream.hi_fill", 4.0);
        cfg.stream.schema.standardize = kv_bool(kv, "stream.standardize", false);
        cfg.stream.schema.validation_prefix = kv_int(kv, "stream.validation_prefix", 0);
    }

    // [method]
    cfg.method = method_from_name(kv_str(kv, "method.name", "vcl"));
    cfg.sigma_n2 = kv_double(kv, "method.sigma_n2", 1.0);
    cfg.prior_scale = kv_double(kv, "method.prior_scale", 1.0);
    cfg.bf_beta = kv_double(kv, "method.bf_beta", 0.9);
    // search methods report the dominant hypothesis; BOCD predicts with the
    // run-length-weighted mixture unless overridden
    const std::string predict_default = cfg.method == Method::Bocd ? "average" : "dominant";
    cfg.predict_dominant = kv_str(kv, "method.predict", predict_default) == "dominant";

    cfg.search.beam_size = kv_int(kv, "method.beam_size", cfg.method == Method::Vbs ? 3 : 1);
    cfg.search.xi0 = kv_double(kv, "method.xi0", 0.0);
    cfg.search.celbo_temp = kv_double(kv, "method.celbo_temp", 1.0);
    cfg.search.diversify = kv_bool(kv, "method.diversify", false);
    const std::string broaden = kv_str(kv, "method.broaden", "multiplicative");
    if (broaden == "multiplicative") {
        cfg.search.broaden.mode = BroadenConfig::Mode::Multiplicative;
    } else if (broaden == "additive") {
        cfg.search.broaden.mode = BroadenConfig::Mode::Additive;
    } else if (broaden == "bf") {
        cfg.search.broaden.mode = BroadenConfig::Mode::BfInterpolate;
    } else {
        throw std::invalid_argument("config: unknown broaden mode '" + broaden + "'");
    }
    cfg.search.broaden.beta = kv_double(kv, "method.beta", 0.5);
    cfg.search.broaden.diffusion = kv_double(kv, "method.diffusion", 1.0);
    cfg.search.broaden.dt = kv_double(kv, "method.dt", 1.0);
    const std::string rule = kv_str(kv, "method.weight_rule", "joint");
    if (rule == "joint") {
        cfg.search.weight_rule = SearchConfig::WeightRule::JointEvidence;
    } else if (rule == "bernoulli") {
        cfg.search.weight_rule = SearchConfig::WeightRule::BernoulliFactor;
    } else {
        throw std::invalid_argument("config: unknown weight rule '" + rule + "'");
    }

    cfg.bocd.hazard = kv_double(kv, "method.hazard", 0.1);
    cfg.bocd.max_kept = kv_int(kv, "method.max_kept", 6);
    cfg.bocd.change_run_threshold = kv_int(kv, "method.run_threshold", 50);

    // [output]
    cfg.out_dir = kv_str(kv, "output.dir", ".");
    cfg.metrics_file = kv_str(kv, "output.metrics", "metrics.csv");
    cfg.summary_file = kv_str(kv, "output.summary", "summary.json");
    cfg.trace_file = kv_str(kv, "output.trace", "");
    cfg.segments_file = kv_str(kv, "output.segments",
                               cfg.method == Method::ShyVgs ? "segments.csv" : "");
    cfg.search.record_traces = !cfg.trace_file.empty();

    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (!(sigma_n2 > 0.0)) throw std::invalid_argument("config: sigma_n2 must be positive");
    if (!(prior_scale > 0.0)) throw std::invalid_argument("config: prior_scale must be positive");
    switch (method) {
        case Method::Vgs:
        case Method::ShyVgs:
            if (search.beam_size != 1) {
                throw std::invalid_argument("config: greedy methods require beam_size = 1");
            }
            [[fallthrough]];
        case Method::Vbs:
            search.validate();
            break;
        case Method::Bocd:
            bocd.validate();
            break;
        case Method::Bf:
            if (!(bf_beta > 0.0 && bf_beta <= 1.0)) {
                throw std::invalid_argument("config: bf_beta must lie in (0,1]");
            }
            break;
        default:
            break;
    }
}

}  // namespace vbs
