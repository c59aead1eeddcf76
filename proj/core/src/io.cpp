#include "skembed/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "skembed/error.hpp"

namespace skembed {

using nlohmann::json;

std::string fmt12(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::stod(fmt12(v));
}

std::size_t line_at(const std::string& text, std::size_t pos) {
    pos = std::min(pos, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos; ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

std::size_t line_of(const std::string& text, const std::string& needle) {
    const auto pos = text.find(needle);
    return pos == std::string::npos ? 1 : line_at(text, pos);
}

namespace {

class Reader {
public:
    Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

    [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
        throw Error(ErrorCode::ParseError, origin_ + ":" + std::to_string(line) + ": " + msg);
    }
    [[noreturn]] void fail_at(const std::string& key, const std::string& msg) const {
        fail(line_of(text_, "\"" + key + "\""), msg);
    }

    void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) const {
        if (!obj.is_object()) fail_at(where, where + " must be an object");
        for (const auto& [k, v] : obj.items()) {
            if (!allowed.count(k)) fail_at(k, "unknown key '" + k + "' in " + where);
        }
    }

    double number(const json& obj, const std::string& key, const std::string& where) const {
        if (!obj.contains(key)) fail_at(where, "missing key '" + key + "' in " + where);
        const json& v = obj.at(key);
        if (!v.is_number()) fail_at(key, "'" + key + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail_at(key, "'" + key + "' must be finite");
        return d;
    }

    DiscreteMeasure measure(const json& root, const std::string& key, int d) const {
        if (!root.contains(key)) fail(1, "missing key '" + key + "'");
        const json& arr = root.at(key);
        if (!arr.is_array()) fail_at(key, "'" + key + "' must be an array of atoms");
        std::vector<Atom> atoms;
        for (const auto& a : arr) {
            only_keys(a, {"z", "m"}, key + " atom");
            if (!a.contains("z") || !a.at("z").is_array()) fail_at(key, key + " atom needs an integer array 'z'");
            const json& z = a.at("z");
            if (static_cast<int>(z.size()) != d) fail_at(key, key + " atom 'z' must have " + std::to_string(d) + " entries");
            Atom atom;
            for (int i = 0; i < d; ++i) {
                if (!z[i].is_number_integer()) fail_at(key, key + " atom coordinates must be integers");
                atom.z[i] = z[i].get<int>();
            }
            atom.m = number(a, "m", key + " atom");
            if (atom.m < 0.0) fail_at(key, key + " atom mass must be nonnegative");
            atoms.push_back(atom);
        }
        return DiscreteMeasure(std::move(atoms));
    }

private:
    const std::string& text_;
    std::string origin_;
};

json measure_json(const DiscreteMeasure& m, int d) {
    json arr = json::array();
    for (const auto& a : m.atoms()) {
        json z = json::array();
        for (int i = 0; i < d; ++i) z.push_back(a.z[i]);
        arr.push_back({{"z", z}, {"m", a.m}});
    }
    return arr;
}

}  // namespace

Instance parse_instance(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError,
                    origin + ":" + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) + ": malformed JSON");
    }
    const Reader r(text, origin);
    r.only_keys(root, {"name", "lattice", "alpha", "sense", "mu", "nu"}, "instance");
    Instance inst;
    if (root.contains("name")) {
        if (!root.at("name").is_string()) r.fail_at("name", "'name' must be a string");
        inst.name = root.at("name").get<std::string>();
    }
    if (!root.contains("lattice")) r.fail(1, "missing key 'lattice'");
    const json& lat = root.at("lattice");
    r.only_keys(lat, {"d", "h", "R_O", "shell_tol", "R_I"}, "lattice");
    if (!lat.contains("d") || !lat.at("d").is_number_integer()) r.fail_at("lattice", "lattice 'd' must be an integer");
    inst.lattice.d = lat.at("d").get<int>();
    if (inst.lattice.d != 2 && inst.lattice.d != 3) r.fail_at("d", "lattice 'd' must be 2 or 3");
    inst.lattice.h = r.number(lat, "h", "lattice");
    inst.lattice.outer_radius = r.number(lat, "R_O", "lattice");
    if (lat.contains("shell_tol")) inst.lattice.shell_tol = r.number(lat, "shell_tol", "lattice");
    if (lat.contains("R_I")) inst.lattice.inner_radius = r.number(lat, "R_I", "lattice");
    if (!(inst.lattice.h > 0.0)) r.fail_at("h", "lattice 'h' must be positive");
    if (!(inst.lattice.outer_radius > 0.0)) r.fail_at("R_O", "lattice 'R_O' must be positive");
    if (root.contains("alpha")) {
        inst.alpha = r.number(root, "alpha", "instance");
        if (!(inst.alpha > 0.0)) r.fail_at("alpha", "'alpha' must be positive");
    }
    if (root.contains("sense")) {
        const json& s = root.at("sense");
        if (!s.is_string() || (s != "min" && s != "max")) r.fail_at("sense", "'sense' must be \"min\" or \"max\"");
        inst.sense = s == "min" ? ObjectiveSense::Minimize : ObjectiveSense::Maximize;
    }
    inst.mu = r.measure(root, "mu", inst.lattice.d);
    inst.nu = r.measure(root, "nu", inst.lattice.d);
    return inst;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, path + ":1: cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    out << content;
}

Instance read_instance(const std::string& path) { return parse_instance(read_file(path), path); }

std::string instance_to_json(const Instance& inst) {
    const int d = inst.lattice.d;
    json lat = {{"d", d}, {"h", inst.lattice.h}, {"R_O", inst.lattice.outer_radius}};
    if (inst.lattice.shell_tol >= 0.0) lat["shell_tol"] = inst.lattice.shell_tol;
    if (inst.lattice.inner_radius > 0.0) lat["R_I"] = inst.lattice.inner_radius;
    json root = {{"name", inst.name},
                 {"lattice", lat},
                 {"alpha", inst.alpha},
                 {"sense", inst.sense == ObjectiveSense::Minimize ? "min" : "max"},
                 {"mu", measure_json(inst.mu, d)},
                 {"nu", measure_json(inst.nu, d)}};
    return root.dump(2) + "\n";
}

void write_instance(const std::string& path, const Instance& inst) { write_file(path, instance_to_json(inst)); }

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ += ',';
        out_ += header[i];
    }
    out_ += '\n';
}

CsvTable& CsvTable::cell(const std::string& s) {
    if (current_++) out_ += ',';
    out_ += s;
    return *this;
}

CsvTable& CsvTable::cell(double v) { return cell(fmt12(v)); }
CsvTable& CsvTable::cell(long long v) { return cell(std::to_string(v)); }
CsvTable& CsvTable::cell(std::size_t v) { return cell(std::to_string(v)); }

void CsvTable::end_row() {
    if (current_ != columns_) {
        throw Error(ErrorCode::InvalidArgument, "csv row has " + std::to_string(current_) + " cells, expected " +
                                                    std::to_string(columns_));
    }
    out_ += '\n';
    current_ = 0;
    ++rows_;
}

std::string CsvTable::str() const { return out_; }

}  // namespace skembed
