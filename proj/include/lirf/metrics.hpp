#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lirf {

// metrics.csv schema: step,phase,metric_name,value,seed,task
// (header mandatory, UTF-8, LF line endings). Rows are validated before they
// are written; values print as %.17g so files reproduce bit-exactly.
struct MetricRow {
    std::int64_t step = 0;
    int phase = 0;  // 0 = outside any training phase (evaluation, studies)
    std::string metric_name;
    double value = 0.0;
    std::uint64_t seed = 0;
    std::string task;
};

class MetricsWriter {
public:
    MetricsWriter() = default;
    explicit MetricsWriter(std::string path);
    ~MetricsWriter();
    MetricsWriter(const MetricsWriter&) = delete;
    MetricsWriter& operator=(const MetricsWriter&) = delete;
    MetricsWriter(MetricsWriter&&) = default;
    MetricsWriter& operator=(MetricsWriter&& other) {
        flush();
        path_ = std::move(other.path_);
        buf_ = std::move(other.buf_);
        other.path_.clear();
        return *this;
    }

    bool open() const { return !path_.empty(); }
    void append(const MetricRow& row);
    void flush();
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string buf_;
};

std::vector<MetricRow> read_metrics(const std::string& path);
std::string format_metric_value(double v);
void validate_metric_row(const MetricRow& row);

}  // namespace lirf
