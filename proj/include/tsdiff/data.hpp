#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsdiff/rng.hpp"

namespace tsdiff {

// A batch of fixed-length multivariate sequences, stored row-major as
// [batch][step][feature]. All entries are finite.
struct SequenceBatch {
    int batch = 0;
    int seq_len = 0;
    int feature_dim = 0;
    std::vector<double> values;  // batch * seq_len * feature_dim

    double& at(int b, int n, int d) {
        return values[(static_cast<std::size_t>(b) * seq_len + n) * feature_dim + d];
    }
    double at(int b, int n, int d) const {
        return values[(static_cast<std::size_t>(b) * seq_len + n) * feature_dim + d];
    }
    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
};

SequenceBatch make_batch(int batch, int seq_len, int feature_dim);

// Per-feature min-max affine map onto [lo, hi]. Features with max == min map
// to the range midpoint. Out-of-range inputs extend linearly (no clamping).
struct ScalerState {
    std::vector<double> feature_min;
    std::vector<double> feature_max;
    double lo = -1.0;
    double hi = 1.0;

    int dims() const { return static_cast<int>(feature_min.size()); }
};

struct WindowSpec {
    int length = 100;           // N >= 2
    int stride = 1;             // >= 1
    double heldout_fraction = 0.2;  // in (0, 1)

    void validate() const;
};

struct LoadedDataset {
    SequenceBatch train;       // raw units
    SequenceBatch heldout;     // raw units
    ScalerState scaler;        // fitted on the training windows only
    std::size_t dropped_rows = 0;
};

// Sine benchmark. Per sequence one frequency f ~ U[0,1]; per feature a phase
// phi ~ U[-pi, pi]; value at step n is sin(2*pi*f*(n/N) + phi), so a window
// spans up to f full periods. Draw order: f first, then phi_0..phi_{D-1}.
SequenceBatch generate_sine(int num_sequences, int seq_len, int dims, Rng& rng);

// Single sequence with explicit frequency/phases; the generator above is a
// loop over this.
void sine_sequence(double freq, const std::vector<double>& phases, int seq_len,
                   SequenceBatch& out, int b);

// Loads a raw CSV (header row, columns selected by name), drops rows whose
// selected fields are missing or unparsable, segments into sliding windows,
// splits contiguously (held-out = tail), and fits the scaler on the training
// windows only. Throws DataError on unreadable files, unknown columns, a
// selected column that never parses, or fewer windows than two.
LoadedDataset load_csv(const std::string& path, const std::vector<std::string>& feature_columns,
                       const WindowSpec& window);

// Splits an in-memory batch contiguously (tail = held-out) and fits the
// scaler on the training part. Used for generated corpora.
LoadedDataset split_batch(SequenceBatch all, double heldout_fraction);

ScalerState fit_scaler(const SequenceBatch& train, double lo = -1.0, double hi = 1.0);
SequenceBatch scale(const SequenceBatch& batch, const ScalerState& scaler);
SequenceBatch inverse_scale(const SequenceBatch& batch, const ScalerState& scaler);

int window_count(long long rows, int length, int stride);

// Sequence-format CSV: header sequence_id,step_index,feature_0..feature_{D-1},
// one row per (sequence, step), doubles printed with 17 significant digits.
void write_sequence_csv(const std::string& path, const SequenceBatch& batch);
SequenceBatch read_sequence_csv(const std::string& path);

// JSON sidecar recording scaler state, window spec, and seed.
void write_sidecar(const std::string& path, const ScalerState& scaler, const WindowSpec& window,
                   std::uint64_t seed, const SequenceBatch& batch);

}  // namespace tsdiff
