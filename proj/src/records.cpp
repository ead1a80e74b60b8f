#include "quasitori/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quasitori/errors.hpp"

namespace tori {

std::string format_double_17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

JsonValue JsonValue::object() {
    JsonValue v;
    v.type_ = Type::Object;
    return v;
}
JsonValue JsonValue::array() {
    JsonValue v;
    v.type_ = Type::Array;
    return v;
}
JsonValue JsonValue::number(double x) {
    JsonValue v;
    v.type_ = Type::Number;
    v.num_ = x;
    return v;
}
JsonValue JsonValue::integer(long long x) {
    JsonValue v;
    v.type_ = Type::Integer;
    v.int_ = x;
    return v;
}
JsonValue JsonValue::boolean(bool b) {
    JsonValue v;
    v.type_ = Type::Bool;
    v.bool_ = b;
    return v;
}
JsonValue JsonValue::str(std::string s) {
    JsonValue v;
    v.type_ = Type::String;
    v.str_ = std::move(s);
    return v;
}
JsonValue JsonValue::vec(const Eigen::VectorXd& x) {
    JsonValue v = array();
    for (Eigen::Index i = 0; i < x.size(); ++i) v.push(number(x[i]));
    return v;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
    members_.emplace_back(key, std::move(v));
    return *this;
}
JsonValue& JsonValue::push(JsonValue v) {
    items_.push_back(std::move(v));
    return *this;
}

namespace {
void dump_escaped(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
}
}  // namespace

void JsonValue::dump_to(std::string& out) const {
    switch (type_) {
        case Type::Object: {
            out += '{';
            bool first = true;
            for (const auto& [k, v] : members_) {
                if (!first) out += ',';
                first = false;
                dump_escaped(k, out);
                out += ':';
                v.dump_to(out);
            }
            out += '}';
            break;
        }
        case Type::Array: {
            out += '[';
            bool first = true;
            for (const auto& v : items_) {
                if (!first) out += ',';
                first = false;
                v.dump_to(out);
            }
            out += ']';
            break;
        }
        case Type::Number: out += format_double_17(num_); break;
        case Type::Integer: out += std::to_string(int_); break;
        case Type::Bool: out += bool_ ? "true" : "false"; break;
        case Type::String: dump_escaped(str_, out); break;
    }
}

std::string JsonValue::dump() const {
    std::string out;
    dump_to(out);
    return out;
}

RecordWriter::RecordWriter(const std::string& path) : path_(path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    out_ = std::make_unique<std::ofstream>(path);
    if (!*out_) throw ConfigError("cannot open output file: " + path);
}

RecordWriter::~RecordWriter() = default;

void RecordWriter::write_line(const std::string& line) {
    *out_ << line << '\n';
    out_->flush();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double_17(row[i]);
        out << '\n';
    }
}

}  // namespace tori
