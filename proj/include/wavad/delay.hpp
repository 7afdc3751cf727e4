#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wavad {

// The two conventions for counting the decoder stack's context. A decoder
// convolution runs at the 100 Hz frame rate, so each frame of context is
// fs/100 samples; the conventions differ in whether a kernel of size k is
// charged k-1 frame hops (pure shrinkage) or k (out to the edge of the last
// frame's analysis window).
enum class DelayMode {
  kStrictShrink,  // DB term: sum (k_i - 1) * fs/100
  kFrameWindow,   // DB term: sum  k_i      * fs/100
};

struct DelaySpec {
  int fs = 8000;
  std::array<int, 4> eb_kernels{30, 30, 80, 153};
  std::array<int, 3> db_kernels{55, 15, 5};  // 0 = layer omitted
  DelayMode mode = DelayMode::kFrameWindow;

  void validate() const;  // fs must be divisible by 100
};

// Length of a valid convolution's output: n - k + 1.
long feature_shrink(long n, long k);

// Total (past + future) context in samples, i.e. twice the algorithmic delay.
long context_samples(const DelaySpec& spec);

double algorithmic_delay_ms(const DelaySpec& spec);

// Frame count from pure shrink composition (mode-independent); the model's
// forward pass must agree with this.
long predict_frame_count(const DelaySpec& spec, long n_samples);

// Smallest input producing `frames` output frames.
long min_input_samples(const DelaySpec& spec, long frames = 1);

struct DelayRow {
  std::array<int, 3> db_kernels;
  double delay_ms;
};

std::vector<DelayRow> delay_table(const DelaySpec& base,
                                  std::span<const std::array<int, 3>> grid);

// CSV with columns db1,db2,db3,mode,delay_ms.
std::string delay_table_csv(const DelaySpec& base, std::span<const std::array<int, 3>> grid);

// The 13 decoder kernel triples of the published delay study.
std::span<const std::array<int, 3>> default_db_kernel_grid();

std::string_view to_string(DelayMode mode);
DelayMode delay_mode_from_string(std::string_view name);

}  // namespace wavad
