#include "tsdiff/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tsdiff/errors.hpp"

namespace tsdiff {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') return false;
    return std::isfinite(out);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void WindowSpec::validate() const {
    if (length < 2) throw ConfigError("window.length: must be >= 2, got " + std::to_string(length));
    if (stride < 1) throw ConfigError("window.stride: must be >= 1, got " + std::to_string(stride));
    if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
        throw ConfigError("window.heldout_fraction: must be in (0, 1), got " +
                          std::to_string(heldout_fraction));
    }
}

SequenceBatch make_batch(int batch, int seq_len, int feature_dim) {
    SequenceBatch b;
    b.batch = batch;
    b.seq_len = seq_len;
    b.feature_dim = feature_dim;
    b.values.assign(static_cast<std::size_t>(batch) * seq_len * feature_dim, 0.0);
    return b;
}

void sine_sequence(double freq, const std::vector<double>& phases, int seq_len,
                   SequenceBatch& out, int b) {
    const int dims = static_cast<int>(phases.size());
    for (int n = 0; n < seq_len; ++n) {
        const double t = static_cast<double>(n) / static_cast<double>(seq_len);
        for (int d = 0; d < dims; ++d) {
            out.at(b, n, d) = std::sin(2.0 * kPi * freq * t + phases[static_cast<std::size_t>(d)]);
        }
    }
}

SequenceBatch generate_sine(int num_sequences, int seq_len, int dims, Rng& rng) {
    if (num_sequences < 1) throw ConfigError("dataset.num_sequences: must be >= 1");
    if (seq_len < 2) throw ConfigError("dataset.seq_len: must be >= 2");
    if (dims < 1) throw ConfigError("dataset.dims: must be >= 1");

    SequenceBatch out = make_batch(num_sequences, seq_len, dims);
    std::vector<double> phases(static_cast<std::size_t>(dims));
    for (int b = 0; b < num_sequences; ++b) {
        const double freq = rng.uniform01();
        for (int d = 0; d < dims; ++d) phases[static_cast<std::size_t>(d)] = rng.uniform(-kPi, kPi);
        sine_sequence(freq, phases, seq_len, out, b);
    }
    return out;
}

int window_count(long long rows, int length, int stride) {
    if (rows < length) return 0;
    return static_cast<int>((rows - length) / stride) + 1;
}

ScalerState fit_scaler(const SequenceBatch& train, double lo, double hi) {
    if (train.empty()) throw DataError("scaler: cannot fit on an empty batch");
    ScalerState s;
    s.lo = lo;
    s.hi = hi;
    s.feature_min.assign(static_cast<std::size_t>(train.feature_dim),
                         std::numeric_limits<double>::infinity());
    s.feature_max.assign(static_cast<std::size_t>(train.feature_dim),
                         -std::numeric_limits<double>::infinity());
    for (int b = 0; b < train.batch; ++b) {
        for (int n = 0; n < train.seq_len; ++n) {
            for (int d = 0; d < train.feature_dim; ++d) {
                const double v = train.at(b, n, d);
                auto di = static_cast<std::size_t>(d);
                s.feature_min[di] = std::min(s.feature_min[di], v);
                s.feature_max[di] = std::max(s.feature_max[di], v);
            }
        }
    }
    return s;
}

SequenceBatch scale(const SequenceBatch& batch, const ScalerState& scaler) {
    if (batch.feature_dim != scaler.dims()) {
        throw DataError("scale: feature dimension mismatch (batch " +
                        std::to_string(batch.feature_dim) + ", scaler " +
                        std::to_string(scaler.dims()) + ")");
    }
    SequenceBatch out = batch;
    const double mid = 0.5 * (scaler.lo + scaler.hi);
    for (int d = 0; d < batch.feature_dim; ++d) {
        auto di = static_cast<std::size_t>(d);
        const double span = scaler.feature_max[di] - scaler.feature_min[di];
        for (int b = 0; b < batch.batch; ++b) {
            for (int n = 0; n < batch.seq_len; ++n) {
                if (span == 0.0) {
                    out.at(b, n, d) = mid;
                } else {
                    out.at(b, n, d) = scaler.lo + (batch.at(b, n, d) - scaler.feature_min[di]) /
                                                      span * (scaler.hi - scaler.lo);
                }
            }
        }
    }
    return out;
}

SequenceBatch inverse_scale(const SequenceBatch& batch, const ScalerState& scaler) {
    if (batch.feature_dim != scaler.dims()) {
        throw DataError("inverse_scale: feature dimension mismatch (batch " +
                        std::to_string(batch.feature_dim) + ", scaler " +
                        std::to_string(scaler.dims()) + ")");
    }
    SequenceBatch out = batch;
    for (int d = 0; d < batch.feature_dim; ++d) {
        auto di = static_cast<std::size_t>(d);
        const double span = scaler.feature_max[di] - scaler.feature_min[di];
        const double mid = 0.5 * (scaler.feature_min[di] + scaler.feature_max[di]);
        for (int b = 0; b < batch.batch; ++b) {
            for (int n = 0; n < batch.seq_len; ++n) {
                if (span == 0.0) {
                    out.at(b, n, d) = mid;
                } else {
                    out.at(b, n, d) = scaler.feature_min[di] +
                                      (batch.at(b, n, d) - scaler.lo) / (scaler.hi - scaler.lo) * span;
                }
            }
        }
    }
    return out;
}

LoadedDataset split_batch(SequenceBatch all, double heldout_fraction) {
    if (all.batch < 2) throw DataError("split: need at least 2 sequences, got " + std::to_string(all.batch));
    if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
        throw ConfigError("heldout_fraction: must be in (0, 1)");
    }
    int heldout = static_cast<int>(std::llround(heldout_fraction * all.batch));
    heldout = std::clamp(heldout, 1, all.batch - 1);
    const int train = all.batch - heldout;

    LoadedDataset ds;
    ds.train = make_batch(train, all.seq_len, all.feature_dim);
    ds.heldout = make_batch(heldout, all.seq_len, all.feature_dim);
    const std::size_t per_seq = static_cast<std::size_t>(all.seq_len) * all.feature_dim;
    std::copy_n(all.values.begin(), per_seq * train, ds.train.values.begin());
    std::copy_n(all.values.begin() + static_cast<std::ptrdiff_t>(per_seq * train), per_seq * heldout,
                ds.heldout.values.begin());
    ds.scaler = fit_scaler(ds.train);
    return ds;
}

LoadedDataset load_csv(const std::string& path, const std::vector<std::string>& feature_columns,
                       const WindowSpec& window) {
    window.validate();
    if (feature_columns.empty()) throw ConfigError("dataset.columns: must name at least one column");

    std::ifstream in(path);
    if (!in) throw DataError("dataset.path: cannot open \"" + path + "\"");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);

    std::vector<int> col_idx;
    for (const auto& name : feature_columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw DataError(path + ": column \"" + name + "\" not found in header");
        }
        col_idx.push_back(static_cast<int>(it - header.begin()));
    }

    const int dims = static_cast<int>(col_idx.size());
    std::vector<double> rows;  // dims-major per kept row
    std::size_t dropped = 0;
    std::vector<bool> column_parsed(static_cast<std::size_t>(dims), false);
    std::vector<std::pair<long long, int>> first_bad(static_cast<std::size_t>(dims), {-1, -1});
    long long row_no = 1;  // header is row 1

    std::vector<double> parsed(static_cast<std::size_t>(dims));
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        bool ok = true;
        for (int d = 0; d < dims; ++d) {
            const auto ci = static_cast<std::size_t>(col_idx[static_cast<std::size_t>(d)]);
            double v = 0.0;
            if (ci >= fields.size() || !parse_double(fields[ci], v)) {
                ok = false;
                if (first_bad[static_cast<std::size_t>(d)].first < 0) {
                    first_bad[static_cast<std::size_t>(d)] = {row_no, static_cast<int>(ci) + 1};
                }
            } else {
                parsed[static_cast<std::size_t>(d)] = v;
                column_parsed[static_cast<std::size_t>(d)] = true;
            }
        }
        if (ok) {
            rows.insert(rows.end(), parsed.begin(), parsed.end());
        } else {
            ++dropped;
        }
    }

    for (int d = 0; d < dims; ++d) {
        if (!column_parsed[static_cast<std::size_t>(d)]) {
            const auto& bad = first_bad[static_cast<std::size_t>(d)];
            throw DataError(path + ": column \"" + feature_columns[static_cast<std::size_t>(d)] +
                            "\" has no numeric values (first failure at row " +
                            std::to_string(bad.first) + ", column " + std::to_string(bad.second) + ")");
        }
    }

    const long long kept = static_cast<long long>(rows.size()) / dims;
    const int n_windows = window_count(kept, window.length, window.stride);
    if (n_windows < 2) {
        throw DataError(path + ": insufficient data: " + std::to_string(kept) + " usable rows yield " +
                        std::to_string(n_windows) + " windows of length " +
                        std::to_string(window.length) + " (need >= 2)");
    }

    SequenceBatch all = make_batch(n_windows, window.length, dims);
    for (int w = 0; w < n_windows; ++w) {
        const long long start = static_cast<long long>(w) * window.stride;
        for (int n = 0; n < window.length; ++n) {
            for (int d = 0; d < dims; ++d) {
                all.at(w, n, d) = rows[static_cast<std::size_t>((start + n) * dims + d)];
            }
        }
    }

    LoadedDataset ds = split_batch(std::move(all), window.heldout_fraction);
    ds.dropped_rows = dropped;
    return ds;
}

void write_sequence_csv(const std::string& path, const SequenceBatch& batch) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write \"" + path + "\"");
    out << "sequence_id,step_index";
    for (int d = 0; d < batch.feature_dim; ++d) out << ",feature_" << d;
    out << "\n";
    for (int b = 0; b < batch.batch; ++b) {
        for (int n = 0; n < batch.seq_len; ++n) {
            out << b << ',' << n;
            for (int d = 0; d < batch.feature_dim; ++d) out << ',' << format_double(batch.at(b, n, d));
            out << "\n";
        }
    }
    if (!out) throw DataError("write failed for \"" + path + "\"");
}

SequenceBatch read_sequence_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open \"" + path + "\"");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "sequence_id" || header[1] != "step_index") {
        throw DataError(path + ": expected header sequence_id,step_index,feature_0,...");
    }
    const int dims = static_cast<int>(header.size()) - 2;
    for (int d = 0; d < dims; ++d) {
        if (header[static_cast<std::size_t>(d + 2)] != "feature_" + std::to_string(d)) {
            throw DataError(path + ": unexpected column \"" + header[static_cast<std::size_t>(d + 2)] +
                            "\" (expected feature_" + std::to_string(d) + ")");
        }
    }

    std::vector<double> values;
    long long row_no = 1;
    long long expected_seq = 0, expected_step = 0;
    long long steps_per_seq = -1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != dims + 2) {
            throw DataError(path + ": row " + std::to_string(row_no) + ": expected " +
                            std::to_string(dims + 2) + " fields, got " + std::to_string(fields.size()));
        }
        double seq_id = 0, step = 0;
        if (!parse_double(fields[0], seq_id) || !parse_double(fields[1], step)) {
            throw DataError(path + ": row " + std::to_string(row_no) + ": bad sequence_id/step_index");
        }
        if (static_cast<long long>(step) == 0 && expected_step != 0) {
            // sequence boundary: lock in the step count from the first sequence
            if (steps_per_seq < 0) steps_per_seq = expected_step;
            expected_step = 0;
            ++expected_seq;
        }
        if (steps_per_seq > 0 && expected_step >= steps_per_seq) {
            throw DataError(path + ": row " + std::to_string(row_no) + ": sequence " +
                            std::to_string(expected_seq) + " longer than " +
                            std::to_string(steps_per_seq) + " steps");
        }
        if (static_cast<long long>(seq_id) != expected_seq || static_cast<long long>(step) != expected_step) {
            throw DataError(path + ": row " + std::to_string(row_no) +
                            ": rows must be ordered by (sequence_id, step_index)");
        }
        for (int d = 0; d < dims; ++d) {
            double v = 0.0;
            if (!parse_double(fields[static_cast<std::size_t>(d + 2)], v)) {
                throw DataError(path + ": row " + std::to_string(row_no) + ", column " +
                                std::to_string(d + 3) + ": not a number");
            }
            values.push_back(v);
        }
        ++expected_step;
    }
    if (steps_per_seq < 0) steps_per_seq = expected_step;
    if (steps_per_seq < 1 || expected_step != steps_per_seq) {
        throw DataError(path + ": truncated final sequence (" + std::to_string(expected_step) + " of " +
                        std::to_string(steps_per_seq) + " steps)");
    }

    SequenceBatch out;
    out.batch = static_cast<int>(expected_seq + 1);
    out.seq_len = static_cast<int>(steps_per_seq);
    out.feature_dim = dims;
    out.values = std::move(values);
    if (out.size() != static_cast<std::size_t>(out.batch) * out.seq_len * out.feature_dim) {
        throw DataError(path + ": inconsistent sequence lengths");
    }
    return out;
}

void write_sidecar(const std::string& path, const ScalerState& scaler, const WindowSpec& window,
                   std::uint64_t seed, const SequenceBatch& batch) {
    nlohmann::json j;
    j["scaler"] = {{"feature_min", scaler.feature_min},
                   {"feature_max", scaler.feature_max},
                   {"lo", scaler.lo},
                   {"hi", scaler.hi}};
    j["window"] = {{"length", window.length},
                   {"stride", window.stride},
                   {"heldout_fraction", window.heldout_fraction}};
    j["seed"] = seed;
    j["count"] = batch.batch;
    j["seq_len"] = batch.seq_len;
    j["feature_dim"] = batch.feature_dim;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write \"" + path + "\"");
    out << j.dump(2) << "\n";
}

}  // namespace tsdiff
