#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tori {

/// Minimal ordered JSON document for result records: keys keep insertion
/// order and doubles serialize with 17 significant digits, so identical runs
/// produce byte-identical files.
class JsonValue {
public:
    static JsonValue object();
    static JsonValue array();
    static JsonValue number(double v);
    static JsonValue integer(long long v);
    static JsonValue boolean(bool v);
    static JsonValue str(std::string v);
    static JsonValue vec(const Eigen::VectorXd& v);

    JsonValue& set(const std::string& key, JsonValue v);  // object only
    JsonValue& push(JsonValue v);                         // array only

    std::string dump() const;

private:
    enum class Type { Object, Array, Number, Integer, Bool, String };
    Type type_ = Type::Object;
    double num_ = 0.0;
    long long int_ = 0;
    bool bool_ = false;
    std::string str_;
    std::vector<std::pair<std::string, JsonValue>> members_;
    std::vector<JsonValue> items_;
    void dump_to(std::string& out) const;
};

std::string format_double_17(double v);

/// Serialized line writer; creates parent directories.
class RecordWriter {
public:
    explicit RecordWriter(const std::string& path);
    ~RecordWriter();
    void write_line(const std::string& line);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> out_;
};

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace tori
