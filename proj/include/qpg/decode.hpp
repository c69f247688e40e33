#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qpg/rng.hpp"

namespace qpg {

/// Measured bitstring b_{n-1} ... b_0 packed with b_k at bit k.
using Bits = std::uint64_t;

/// Parses "b_{n-1}...b_0" (most significant bit first).
Bits parse_bitstring(std::string_view text, int n_qubits);
std::string format_bitstring(Bits bits, int n_qubits);

inline int parity(Bits b) { return static_cast<int>(__builtin_popcountll(b) & 1); }

enum class DecodeKind { MsbLocal, QLocalParity, GlobalRecursive, ExplicitTable };

std::string to_string(DecodeKind kind);

/// Classical post-processing f: {0,1}^n -> {0, ..., M-1}.
class PostProcessing {
 public:
  /// Largest n for which explicit lookup tables are materialized.
  static constexpr int kMaxTableQubits = 20;

  /// a = b_{n-1}; two actions.
  static PostProcessing msb_local(int n_qubits);
  /// a = parity of the q most significant bits; two actions.
  static PostProcessing qlocal_parity(int n_qubits, int q);
  /// a = [b_0 ... b_{m-1} (b_m xor ... xor b_{n-1})] read most significant
  /// digit first, m = log2(M) - 1. M must be a power of two, M <= 2^n.
  static PostProcessing global_recursive(int n_qubits, int num_actions);
  /// table[b] = action. Every entry must lie in [0, num_actions).
  static PostProcessing explicit_table(int n_qubits, int num_actions, std::vector<int> table);
  /// Builds a table from per-action sets; the sets must be disjoint and cover {0,1}^n.
  static PostProcessing from_sets(int n_qubits, const std::vector<std::vector<Bits>>& sets);

  DecodeKind kind() const { return kind_; }
  int num_qubits() const { return n_; }
  int num_actions() const { return m_; }
  int prefix_length() const { return q_; }

  int decode(Bits bits) const;
  int decode(std::string_view bitstring) const;

  /// Lookup table over all 2^n strings (n <= kMaxTableQubits).
  std::vector<int> table() const;

  /// True if every action has exactly 2^n / M preimages.
  bool is_balanced() const;

  std::string describe() const;

 private:
  PostProcessing(DecodeKind kind, int n, int m) : kind_(kind), n_(n), m_(m) {}

  DecodeKind kind_;
  int n_;
  int m_;
  int q_ = 0;
  std::vector<int> table_;
};

/// Set membership by the recursive parity construction: level 0 splits by the
/// parity of all bits; level m refines by the parity of b_m ... b_{n-1}.
bool recursive_partition_contains(int n_qubits, int level, unsigned action, Bits bits);

/// Materializes the M sets of the recursive construction (n <= 16).
std::vector<std::vector<Bits>> partition_sets(int n_qubits, int num_actions);

/// Minimum number of bit positions of b that determine f(b); exhaustive
/// search over position subsets in increasing size (n <= 16).
int extracted_information(const PostProcessing& fn, Bits bits);

/// Extracted information of every bitstring at once, by dynamic programming
/// over position subsets (n <= 16, memory ~ 3^n).
std::vector<int> extracted_information_table(const PostProcessing& fn);

struct Rational {
  std::int64_t num;
  std::int64_t den;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational reduced() const;
  std::string str() const;
  bool operator==(const Rational& o) const { return num * o.den == o.num * den; }
};

struct GlobalityReport {
  int n_qubits;
  int num_actions;
  std::vector<int> extracted_info;  // indexed by bitstring
  std::uint64_t ei_total;

  Rational exact() const { return Rational{static_cast<std::int64_t>(ei_total),
                                           std::int64_t{1} << n_qubits}.reduced(); }
  double value() const { return exact().value(); }
};

/// Average extracted information over all 2^n strings. Throws std::logic_error
/// if G > n, or if G < log2(M) for a balanced partitioning.
GlobalityReport globality(const PostProcessing& fn);

using BigInt = boost::multiprecision::cpp_int;

/// N! / (M! ((N/M)!)^M) with N = 2^n: balanced partitionings up to relabeling.
BigInt count_balanced_partitionings(int n_qubits, int num_actions);

struct GlobalityHistogram {
  int n_qubits = 0;
  int num_actions = 0;
  /// Sum of extracted information (G * 2^n) -> number of partitionings.
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  bool exhaustive = false;

  double g_value(std::uint64_t ei_total) const {
    return static_cast<double>(ei_total) / static_cast<double>(std::uint64_t{1} << n_qubits);
  }
};

inline constexpr std::uint64_t kMaxExhaustivePartitionings = 10'000'000;

/// Every balanced partitioning, each counted once up to action relabeling.
GlobalityHistogram globality_histogram_exhaustive(int n_qubits, int num_actions);

/// Uniformly random balanced partitionings.
GlobalityHistogram globality_histogram_sampled(int n_qubits, int num_actions,
                                               std::uint64_t samples, Rng& rng);

/// "bits,action" lines; '#' comments and blank lines are skipped.
PostProcessing read_table(std::istream& in);
void write_table(std::ostream& out, const PostProcessing& fn);

/// CSV "g_value,count".
void write_histogram_csv(std::ostream& out, const GlobalityHistogram& hist);

}  // namespace qpg
