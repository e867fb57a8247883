#include "lirf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lirf {

namespace {
constexpr const char* kHeader = "step,phase,metric_name,value,seed,task\n";
}

std::string format_metric_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void validate_metric_row(const MetricRow& row) {
    if (row.metric_name.empty()) throw std::invalid_argument("metric_name must be nonempty");
    for (char c : row.metric_name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            throw std::invalid_argument("metric_name has invalid character: " + row.metric_name);
    if (row.task.empty()) throw std::invalid_argument("task must be nonempty");
    for (char c : row.task)
        if (c == ',' || c == '\n') throw std::invalid_argument("task has invalid character");
    if (!std::isfinite(row.value)) throw std::invalid_argument("metric value must be finite");
    if (row.phase < 0 || row.phase > 4) throw std::invalid_argument("phase must be in 0..4");
}

MetricsWriter::MetricsWriter(std::string path) : path_(std::move(path)) {
    const auto dir = std::filesystem::path(path_).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream f(path_, std::ios::trunc | std::ios::binary);
    if (!f) throw std::runtime_error("cannot open metrics file: " + path_);
    f << kHeader;
}

MetricsWriter::~MetricsWriter() {
    try {
        flush();
    } catch (...) {
    }
}

void MetricsWriter::append(const MetricRow& row) {
    if (!open()) return;
    validate_metric_row(row);
    buf_ += std::to_string(row.step);
    buf_ += ',';
    buf_ += std::to_string(row.phase);
    buf_ += ',';
    buf_ += row.metric_name;
    buf_ += ',';
    buf_ += format_metric_value(row.value);
    buf_ += ',';
    buf_ += std::to_string(row.seed);
    buf_ += ',';
    buf_ += row.task;
    buf_ += '\n';
    if (buf_.size() > 1 << 16) flush();
}

void MetricsWriter::flush() {
    if (!open() || buf_.empty()) return;
    std::ofstream f(path_, std::ios::app | std::ios::binary);
    if (!f) throw std::runtime_error("cannot append metrics file: " + path_);
    f << buf_;
    buf_.clear();
}

std::vector<MetricRow> read_metrics(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read metrics file: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "step,phase,metric_name,value,seed,task")
        throw std::runtime_error("bad metrics header in " + path);
    std::vector<MetricRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string field;
        MetricRow r;
        std::getline(is, field, ',');
        r.step = std::stoll(field);
        std::getline(is, field, ',');
        r.phase = std::stoi(field);
        std::getline(is, r.metric_name, ',');
        std::getline(is, field, ',');
        r.value = std::stod(field);
        std::getline(is, field, ',');
        r.seed = std::stoull(field);
        std::getline(is, r.task);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace lirf
