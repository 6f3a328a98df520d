/*
 * Copyright 2026 The Hemlet Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hemlet/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace hemlet::io {

namespace {

struct Value {
    enum class Kind { Str, Num, Bool };
    Kind kind = Kind::Num;
    std::string s;
    double num = 0.0;
    bool b = false;
};

std::string path_of(const std::string& sec, const std::string& key) { return sec + "." + key; }

std::int64_t as_int(const Value& v, const std::string& where) {
    if (v.kind != Value::Kind::Num || std::floor(v.num) != v.num)
        throw ConfigError(where + ": expected an integer");
    return static_cast<std::int64_t>(v.num);
}

double as_num(const Value& v, const std::string& where) {
    if (v.kind != Value::Kind::Num) throw ConfigError(where + ": expected a number");
    return v.num;
}

std::string as_str(const Value& v, const std::string& where) {
    if (v.kind != Value::Kind::Str) throw ConfigError(where + ": expected a string");
    return v.s;
}

bool as_bool(const Value& v, const std::string& where) {
    if (v.kind != Value::Kind::Bool) throw ConfigError(where + ": expected true/false");
    return v.b;
}

void apply(ParsedConfig& cfg, const std::string& sec, const std::string& key, const Value& v) {
    const std::string where = path_of(sec, key);
    auto& m = cfg.model;
    auto& s = cfg.system;
    if (sec == "model") {
        if (key == "name") m.name = as_str(v, where);
        else if (key == "d") m.embed_dim = static_cast<int>(as_int(v, where));
        else if (key == "D") m.ffn_dim = static_cast<int>(as_int(v, where));
        else if (key == "N") m.blocks = static_cast<int>(as_int(v, where));
        else if (key == "H") m.heads = static_cast<int>(as_int(v, where));
        else if (key == "L") m.seq_len = static_cast<int>(as_int(v, where));
        else if (key == "weight_bits") m.weight_bits = static_cast<int>(as_int(v, where));
        else if (key == "act_bits") m.act_bits = static_cast<int>(as_int(v, where));
        else throw ConfigError("unknown key: " + where);
    } else if (sec == "acim") {
        auto& a = s.acim;
        if (key == "pe_per_chiplet") a.pe_per_chiplet = static_cast<int>(as_int(v, where));
        else if (key == "sa_per_pe") a.sa_per_pe = static_cast<int>(as_int(v, where));
        else if (key == "sa_rows") a.sa_rows = static_cast<int>(as_int(v, where));
        else if (key == "sa_cols") a.sa_cols = static_cast<int>(as_int(v, where));
        else if (key == "group_size") a.group_size = static_cast<int>(as_int(v, where));
        else if (key == "cell_bits") a.cell_bits = static_cast<int>(as_int(v, where));
        else if (key == "adc_bits") a.adc_bits = static_cast<int>(as_int(v, where));
        else if (key == "t_adc_ns") a.t_adc_ns = as_num(v, where);
        else if (key == "e_adc_pj") a.e_adc_pj = as_num(v, where);
        else if (key == "e_mac_row_pj") a.e_mac_row_pj = as_num(v, where);
        else if (key == "t_row_ns") a.t_row_ns = as_num(v, where);
        else throw ConfigError("unknown key: " + where);
    } else if (sec == "dcim") {
        auto& d = s.dcim;
        if (key == "pe_per_chiplet") d.pe_per_chiplet = static_cast<int>(as_int(v, where));
        else if (key == "sa_per_pe") d.sa_per_pe = static_cast<int>(as_int(v, where));
        else if (key == "sa_rows") d.sa_rows = static_cast<int>(as_int(v, where));
        else if (key == "sa_cols") d.sa_cols = static_cast<int>(as_int(v, where));
        else if (key == "t_cycle_ns") d.t_cycle_ns = as_num(v, where);
        else if (key == "e_mac_pj") d.e_mac_pj = as_num(v, where);
        else if (key == "t_write_ns") d.t_write_ns = as_num(v, where);
        else if (key == "e_write_pj") d.e_write_pj = as_num(v, where);
        else if (key == "chiplet_buffer_bytes") d.chiplet_buffer_bytes = as_int(v, where);
        else throw ConfigError("unknown key: " + where);
    } else if (sec == "idp") {
        auto& i = s.idp;
        if (key == "sram_bank_count") i.sram_bank_count = static_cast<int>(as_int(v, where));
        else if (key == "bank_bytes") i.bank_bytes = as_int(v, where);
        else if (key == "simd_width") i.simd_width = static_cast<int>(as_int(v, where));
        else if (key == "t_simd_ns") i.t_simd_ns = as_num(v, where);
        else if (key == "e_simd_pj") i.e_simd_pj = as_num(v, where);
        else if (key == "e_buf_r_pj") i.e_buf_r_pj = as_num(v, where);
        else if (key == "e_buf_w_pj") i.e_buf_w_pj = as_num(v, where);
        else throw ConfigError("unknown key: " + where);
    } else if (sec == "nop") {
        auto& n = s.nop;
        if (key == "mesh_x") n.mesh_x = static_cast<int>(as_int(v, where));
        else if (key == "mesh_y") n.mesh_y = static_cast<int>(as_int(v, where));
        else if (key == "bw_gbps") n.bw_gbps = as_num(v, where);
        else if (key == "t_hop_ns") n.t_hop_ns = as_num(v, where);
        else if (key == "e_bit_pj") n.e_bit_pj = as_num(v, where);
        else if (key == "link_serialization") n.link_serialization = as_bool(v, where);
        else throw ConfigError("unknown key: " + where);
    } else if (sec == "system") {
        if (key == "label") s.label = as_str(v, where);
        else if (key == "n_acim_chiplets") s.n_acim_chiplets = static_cast<int>(as_int(v, where));
        else if (key == "n_dcim_chiplets") s.n_dcim_chiplets = static_cast<int>(as_int(v, where));
        else if (key == "n_idp_chiplets") s.n_idp_chiplets = static_cast<int>(as_int(v, where));
        else if (key == "chiplet_buf_t_ns") s.chiplet_buf.t_ns = as_num(v, where);
        else if (key == "chiplet_buf_e_pj") s.chiplet_buf.e_pj = as_num(v, where);
        else if (key == "local_buf_t_ns") s.local_buf.t_ns = as_num(v, where);
        else if (key == "local_buf_e_pj") s.local_buf.e_pj = as_num(v, where);
        else if (key == "block_tokens") s.block_tokens = static_cast<int>(as_int(v, where));
        else if (key == "clock_ghz") s.clock_ghz = as_num(v, where);
        else throw ConfigError("unknown key: " + where);
    } else {
        throw ConfigError("unknown section: [" + sec + "]");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Value parse_scalar(const std::string& raw, int line_no) {
    const std::string t = trim(raw);
    if (t.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing value");
    Value v;
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
        v.kind = Value::Kind::Str;
        v.s = t.substr(1, t.size() - 2);
        return v;
    }
    if (t == "true" || t == "false") {
        v.kind = Value::Kind::Bool;
        v.b = t == "true";
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        throw ConfigError("line " + std::to_string(line_no) + ": cannot parse value '" + t + "'");
    v.kind = Value::Kind::Num;
    return v;
}

std::string fmt_num(double x) {
    if (std::floor(x) == x && std::abs(x) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", x);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

ParsedConfig parse_toml(const std::string& text) {
    ParsedConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        // strip comments outside quotes
        bool in_str = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                line = line.substr(0, i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section != "model" && section != "acim" && section != "dcim" &&
                section != "idp" && section != "nop" && section != "system")
                throw ConfigError("unknown section: [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        apply(cfg, section, key, parse_scalar(t.substr(eq + 1), line_no));
    }
    return cfg;
}

ParsedConfig parse_json_text(const std::string& text) {
    ParsedConfig cfg;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    for (const auto& [sec, body] : j.items()) {
        if (!body.is_object()) throw ConfigError("section " + sec + " must be an object");
        for (const auto& [key, val] : body.items()) {
            Value v;
            if (val.is_string()) {
                v.kind = Value::Kind::Str;
                v.s = val.get<std::string>();
            } else if (val.is_boolean()) {
                v.kind = Value::Kind::Bool;
                v.b = val.get<bool>();
            } else if (val.is_number()) {
                v.kind = Value::Kind::Num;
                v.num = val.get<double>();
            } else {
                throw ConfigError(path_of(sec, key) + ": unsupported value type");
            }
            apply(cfg, sec, key, v);
        }
    }
    return cfg;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    const bool json_ext = path.size() > 5 && path.substr(path.size() - 5) == ".json";
    const bool toml_ext = path.size() > 5 && path.substr(path.size() - 5) == ".toml";
    if (json_ext) return parse_json_text(text);
    if (toml_ext) return parse_toml(text);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return parse_json_text(text);
    return parse_toml(text);
}

std::string to_toml(const ParsedConfig& cfg) {
    const auto& m = cfg.model;
    const auto& s = cfg.system;
    std::ostringstream os;
    os << "[model]\n";
    os << "name = \"" << m.name << "\"\n";
    os << "d = " << m.embed_dim << "\n";
    os << "D = " << m.ffn_dim << "\n";
    os << "N = " << m.blocks << "\n";
    os << "H = " << m.heads << "\n";
    os << "L = " << m.seq_len << "\n";
    os << "weight_bits = " << m.weight_bits << "\n";
    os << "act_bits = " << m.act_bits << "\n\n";
    os << "[acim]\n";
    os << "pe_per_chiplet = " << s.acim.pe_per_chiplet << "\n";
    os << "sa_per_pe = " << s.acim.sa_per_pe << "\n";
    os << "sa_rows = " << s.acim.sa_rows << "\n";
    os << "sa_cols = " << s.acim.sa_cols << "\n";
    os << "group_size = " << s.acim.group_size << "\n";
    os << "cell_bits = " << s.acim.cell_bits << "\n";
    os << "adc_bits = " << s.acim.adc_bits << "\n";
    os << "t_adc_ns = " << fmt_num(s.acim.t_adc_ns) << "\n";
    os << "e_adc_pj = " << fmt_num(s.acim.e_adc_pj) << "\n";
    os << "e_mac_row_pj = " << fmt_num(s.acim.e_mac_row_pj) << "\n";
    os << "t_row_ns = " << fmt_num(s.acim.t_row_ns) << "\n\n";
    os << "[dcim]\n";
    os << "pe_per_chiplet = " << s.dcim.pe_per_chiplet << "\n";
    os << "sa_per_pe = " << s.dcim.sa_per_pe << "\n";
    os << "sa_rows = " << s.dcim.sa_rows << "\n";
    os << "sa_cols = " << s.dcim.sa_cols << "\n";
    os << "t_cycle_ns = " << fmt_num(s.dcim.t_cycle_ns) << "\n";
    os << "e_mac_pj = " << fmt_num(s.dcim.e_mac_pj) << "\n";
    os << "t_write_ns = " << fmt_num(s.dcim.t_write_ns) << "\n";
    os << "e_write_pj = " << fmt_num(s.dcim.e_write_pj) << "\n";
    os << "chiplet_buffer_bytes = " << s.dcim.chiplet_buffer_bytes << "\n\n";
    os << "[idp]\n";
    os << "sram_bank_count = " << s.idp.sram_bank_count << "\n";
    os << "bank_bytes = " << s.idp.bank_bytes << "\n";
    os << "simd_width = " << s.idp.simd_width << "\n";
    os << "t_simd_ns = " << fmt_num(s.idp.t_simd_ns) << "\n";
    os << "e_simd_pj = " << fmt_num(s.idp.e_simd_pj) << "\n";
    os << "e_buf_r_pj = " << fmt_num(s.idp.e_buf_r_pj) << "\n";
    os << "e_buf_w_pj = " << fmt_num(s.idp.e_buf_w_pj) << "\n\n";
    os << "[nop]\n";
    os << "mesh_x = " << s.nop.mesh_x << "\n";
    os << "mesh_y = " << s.nop.mesh_y << "\n";
    os << "bw_gbps = " << fmt_num(s.nop.bw_gbps) << "\n";
    os << "t_hop_ns = " << fmt_num(s.nop.t_hop_ns) << "\n";
    os << "e_bit_pj = " << fmt_num(s.nop.e_bit_pj) << "\n";
    os << "link_serialization = " << (s.nop.link_serialization ? "true" : "false") << "\n\n";
    os << "[system]\n";
    os << "label = \"" << s.label << "\"\n";
    os << "n_acim_chiplets = " << s.n_acim_chiplets << "\n";
    os << "n_dcim_chiplets = " << s.n_dcim_chiplets << "\n";
    os << "n_idp_chiplets = " << s.n_idp_chiplets << "\n";
    os << "chiplet_buf_t_ns = " << fmt_num(s.chiplet_buf.t_ns) << "\n";
    os << "chiplet_buf_e_pj = " << fmt_num(s.chiplet_buf.e_pj) << "\n";
    os << "local_buf_t_ns = " << fmt_num(s.local_buf.t_ns) << "\n";
    os << "local_buf_e_pj = " << fmt_num(s.local_buf.e_pj) << "\n";
    os << "block_tokens = " << s.block_tokens << "\n";
    os << "clock_ghz = " << fmt_num(s.clock_ghz) << "\n";
    return os.str();
}

std::string to_json(const ParsedConfig& cfg) {
    const auto& m = cfg.model;
    const auto& s = cfg.system;
    nlohmann::ordered_json j;
    j["model"] = {{"name", m.name},     {"d", m.embed_dim},
                  {"D", m.ffn_dim},     {"N", m.blocks},
                  {"H", m.heads},       {"L", m.seq_len},
                  {"weight_bits", m.weight_bits}, {"act_bits", m.act_bits}};
    j["acim"] = {{"pe_per_chiplet", s.acim.pe_per_chiplet},
                 {"sa_per_pe", s.acim.sa_per_pe},
                 {"sa_rows", s.acim.sa_rows},
                 {"sa_cols", s.acim.sa_cols},
                 {"group_size", s.acim.group_size},
                 {"cell_bits", s.acim.cell_bits},
                 {"adc_bits", s.acim.adc_bits},
                 {"t_adc_ns", s.acim.t_adc_ns},
                 {"e_adc_pj", s.acim.e_adc_pj},
                 {"e_mac_row_pj", s.acim.e_mac_row_pj},
                 {"t_row_ns", s.acim.t_row_ns}};
    j["dcim"] = {{"pe_per_chiplet", s.dcim.pe_per_chiplet},
                 {"sa_per_pe", s.dcim.sa_per_pe},
                 {"sa_rows", s.dcim.sa_rows},
                 {"sa_cols", s.dcim.sa_cols},
                 {"t_cycle_ns", s.dcim.t_cycle_ns},
                 {"e_mac_pj", s.dcim.e_mac_pj},
                 {"t_write_ns", s.dcim.t_write_ns},
                 {"e_write_pj", s.dcim.e_write_pj},
                 {"chiplet_buffer_bytes", s.dcim.chiplet_buffer_bytes}};
    j["idp"] = {{"sram_bank_count", s.idp.sram_bank_count},
                {"bank_bytes", s.idp.bank_bytes},
                {"simd_width", s.idp.simd_width},
                {"t_simd_ns", s.idp.t_simd_ns},
                {"e_simd_pj", s.idp.e_simd_pj},
                {"e_buf_r_pj", s.idp.e_buf_r_pj},
                {"e_buf_w_pj", s.idp.e_buf_w_pj}};
    j["nop"] = {{"mesh_x", s.nop.mesh_x},   {"mesh_y", s.nop.mesh_y},
                {"bw_gbps", s.nop.bw_gbps}, {"t_hop_ns", s.nop.t_hop_ns},
                {"e_bit_pj", s.nop.e_bit_pj}, {"link_serialization", s.nop.link_serialization}};
    j["system"] = {{"label", s.label},
                   {"n_acim_chiplets", s.n_acim_chiplets},
                   {"n_dcim_chiplets", s.n_dcim_chiplets},
                   {"n_idp_chiplets", s.n_idp_chiplets},
                   {"chiplet_buf_t_ns", s.chiplet_buf.t_ns},
                   {"chiplet_buf_e_pj", s.chiplet_buf.e_pj},
                   {"local_buf_t_ns", s.local_buf.t_ns},
                   {"local_buf_e_pj", s.local_buf.e_pj},
                   {"block_tokens", s.block_tokens},
                   {"clock_ghz", s.clock_ghz}};
    return j.dump(2);
}

}  // namespace hemlet::io
