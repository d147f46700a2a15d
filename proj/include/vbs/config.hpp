#pragma once

// Flat INI-style run configuration: [section] blocks of key = value lines,
// addressed as "section.key". CLI flags override file keys.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vbs/baselines.hpp"
#include "vbs/stream.hpp"

namespace vbs {

using KvMap = std::map<std::string, std::string>;

KvMap parse_ini(std::istream& in);
KvMap parse_ini_file(const std::string& path);
// assignment has the form "section.key=value"
void apply_override(KvMap& kv, const std::string& assignment);

double kv_double(const KvMap& kv, const std::string& key, double fallback);
int kv_int(const KvMap& kv, const std::string& key, int fallback);
bool kv_bool(const KvMap& kv, const std::string& key, bool fallback);
std::string kv_str(const KvMap& kv, const std::string& key, const std::string& fallback);
std::vector<std::string> split_list(const std::string& csv);

enum class Method { Vbs, Vgs, ShyVgs, Bocd, Bf, Vcl, Lp, Independent };

Method method_from_name(const std::string& name);
const char* method_name(Method m);

struct RunConfig {
    StreamSpec stream;
    Method method = Method::Vcl;

    SearchConfig search;          // vbs / vgs / shy_vgs
    BocdConfig bocd;              // bocd
    double bf_beta = 0.9;         // bf
    double sigma_n2 = 1.0;
    double prior_scale = 1.0;     // base prior is N(0, prior_scale^2 I)
    bool predict_dominant = true; // false: beam-weighted average prediction

    std::string out_dir = ".";
    std::string metrics_file = "metrics.csv";
    std::string summary_file = "summary.json";
    std::string trace_file;       // empty disables the hypothesis trace export
    std::string segments_file;    // shy emissions; defaulted for shy_vgs

    KvMap echo;                   // resolved key-value view for the summary

    static RunConfig from_kv(const KvMap& kv);
    void validate() const;
};

}  // namespace vbs
