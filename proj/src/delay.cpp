#include "wavad/delay.hpp"

#include <sstream>
#include <string>

#include "wavad/errors.hpp"

namespace wavad {

void DelaySpec::validate() const {
  if (fs <= 0 || fs % 100 != 0)
    throw ConfigError("sampling rate must be a positive multiple of 100 Hz, got " +
                      std::to_string(fs));
  for (int k : eb_kernels)
    if (k < 1) throw ConfigError("encoder kernel sizes must be positive");
  for (int k : db_kernels)
    if (k < 0) throw ConfigError("decoder kernel sizes must be nonnegative");
}

long feature_shrink(long n, long k) {
  if (k < 1) throw ConfigError("feature_shrink: kernel size must be positive");
  if (n < k)
    throw InsufficientContextError("feature_shrink: input length " + std::to_string(n) +
                                   " shorter than kernel size " + std::to_string(k));
  return n - k + 1;
}

long context_samples(const DelaySpec& spec) {
  spec.validate();
  const long hop = spec.fs / 100;
  long ctx = 0;
  for (int k : spec.eb_kernels) ctx += k - 1;
  ctx += hop - 1;
  for (int k : spec.db_kernels) {
    if (k == 0) continue;  // omitted layer
    ctx += (spec.mode == DelayMode::kStrictShrink ? k - 1 : k) * hop;
  }
  return ctx;
}

double algorithmic_delay_ms(const DelaySpec& spec) {
  return static_cast<double>(context_samples(spec)) * 1000.0 / (2.0 * spec.fs);
}

long predict_frame_count(const DelaySpec& spec, long n_samples) {
  spec.validate();
  const long hop = spec.fs / 100;
  const long frame_len = 2 * hop;
  long n = n_samples;
  for (int k : spec.eb_kernels) n = feature_shrink(n, k);
  if (n < frame_len)
    throw InsufficientContextError("framing input of " + std::to_string(n) +
                                   " samples shorter than frame length " +
                                   std::to_string(frame_len));
  long frames = (n - frame_len) / hop + 1;
  for (int k : spec.db_kernels) {
    if (k == 0) continue;
    frames = feature_shrink(frames, k);
  }
  return frames;
}

long min_input_samples(const DelaySpec& spec, long frames) {
  spec.validate();
  const long hop = spec.fs / 100;
  long eb_ctx = 0;
  for (int k : spec.eb_kernels) eb_ctx += k - 1;
  long db_shrink = 0;
  for (int k : spec.db_kernels)
    if (k > 0) db_shrink += k - 1;
  return eb_ctx + 2 * hop + (frames - 1 + db_shrink) * hop;
}

namespace {

// 398 is printed as "398", 23.5 as "23.5".
std::string format_ms(double ms) {
  std::ostringstream os;
  os.precision(12);
  os << ms;
  return os.str();
}

constexpr std::array<std::array<int, 3>, 13> kDefaultGrid = {{
    {55, 15, 5},
    {45, 15, 5},
    {35, 15, 5},
    {25, 15, 5},
    {15, 10, 5},
    {10, 7, 5},
    {7, 5, 5},
    {5, 3, 3},
    {3, 3, 2},
    {2, 2, 2},
    {2, 2, 0},
    {2, 0, 0},
    {0, 0, 0},
}};

}  // namespace

std::vector<DelayRow> delay_table(const DelaySpec& base,
                                  std::span<const std::array<int, 3>> grid) {
  std::vector<DelayRow> rows;
  rows.reserve(grid.size());
  for (const auto& db : grid) {
    DelaySpec spec = base;
    spec.db_kernels = db;
    rows.push_back({db, algorithmic_delay_ms(spec)});
  }
  return rows;
}

std::string delay_table_csv(const DelaySpec& base, std::span<const std::array<int, 3>> grid) {
  std::ostringstream os;
  os << "db1,db2,db3,mode,delay_ms\n";
  for (const DelayRow& row : delay_table(base, grid)) {
    os << row.db_kernels[0] << ',' << row.db_kernels[1] << ',' << row.db_kernels[2] << ','
       << to_string(base.mode) << ',' << format_ms(row.delay_ms) << '\n';
  }
  return os.str();
}

std::span<const std::array<int, 3>> default_db_kernel_grid() { return kDefaultGrid; }

std::string_view to_string(DelayMode mode) {
  return mode == DelayMode::kStrictShrink ? "shrink" : "window";
}

DelayMode delay_mode_from_string(std::string_view name) {
  if (name == "shrink") return DelayMode::kStrictShrink;
  if (name == "window") return DelayMode::kFrameWindow;
  throw ConfigError("unknown delay mode '" + std::string(name) + "' (expected shrink or window)");
}

}  // namespace wavad
