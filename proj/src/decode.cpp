#include "qpg/decode.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qpg/csv.hpp"

namespace qpg {

namespace {

constexpr int kMaxEiQubits = 16;

void check_qubits(int n, int limit, const char* what) {
  if (n < 1 || n > limit) {
    throw std::out_of_range(std::string(what) + ": n = " + std::to_string(n) +
                            " outside supported range [1, " + std::to_string(limit) + "]");
  }
}

}  // namespace

Bits parse_bitstring(std::string_view text, int n_qubits) {
  if (static_cast<int>(text.size()) != n_qubits) {
    throw std::invalid_argument("bitstring '" + std::string(text) + "' has length " +
                                std::to_string(text.size()) + ", expected " +
                                std::to_string(n_qubits));
  }
  Bits bits = 0;
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("bitstring '" + std::string(text) + "' contains '" + c + "'");
    }
    bits = (bits << 1) | static_cast<Bits>(c == '1');
  }
  return bits;
}

std::string format_bitstring(Bits bits, int n_qubits) {
  std::string out(static_cast<std::size_t>(n_qubits), '0');
  for (int k = 0; k < n_qubits; ++k) {
    if ((bits >> k) & 1) out[static_cast<std::size_t>(n_qubits - 1 - k)] = '1';
  }
  return out;
}

std::string to_string(DecodeKind kind) {
  switch (kind) {
    case DecodeKind::MsbLocal: return "msb_local";
    case DecodeKind::QLocalParity: return "qlocal_parity";
    case DecodeKind::GlobalRecursive: return "global_recursive";
    case DecodeKind::ExplicitTable: return "table";
  }
  return "?";
}

PostProcessing PostProcessing::msb_local(int n) {
  check_qubits(n, 63, "msb_local");
  return PostProcessing(DecodeKind::MsbLocal, n, 2);
}

PostProcessing PostProcessing::qlocal_parity(int n, int q) {
  check_qubits(n, 63, "qlocal_parity");
  if (q < 1 || q > n) throw std::invalid_argument("qlocal_parity: q must be in [1, n]");
  PostProcessing p(DecodeKind::QLocalParity, n, 2);
  p.q_ = q;
  return p;
}

PostProcessing PostProcessing::global_recursive(int n, int num_actions) {
  check_qubits(n, 63, "global_recursive");
  if (num_actions < 2 || !std::has_single_bit(static_cast<unsigned>(num_actions))) {
    throw std::invalid_argument("global_recursive: action count must be a power of two >= 2");
  }
  if (std::countr_zero(static_cast<unsigned>(num_actions)) > n) {
    throw std::invalid_argument("global_recursive: action count exceeds 2^n");
  }
  return PostProcessing(DecodeKind::GlobalRecursive, n, num_actions);
}

PostProcessing PostProcessing::explicit_table(int n, int num_actions, std::vector<int> table) {
  check_qubits(n, kMaxTableQubits, "explicit_table");
  if (num_actions < 1) throw std::invalid_argument("explicit_table: need at least one action");
  if (table.size() != (std::size_t{1} << n)) {
    throw std::invalid_argument("explicit_table: table must cover all 2^n bitstrings");
  }
  for (int a : table) {
    if (a < 0 || a >= num_actions) {
      throw std::invalid_argument("explicit_table: action " + std::to_string(a) +
                                  " outside [0, " + std::to_string(num_actions) + ")");
    }
  }
  PostProcessing p(DecodeKind::ExplicitTable, n, num_actions);
  p.table_ = std::move(table);
  return p;
}

PostProcessing PostProcessing::from_sets(int n, const std::vector<std::vector<Bits>>& sets) {
  check_qubits(n, kMaxTableQubits, "from_sets");
  std::vector<int> table(std::size_t{1} << n, -1);
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (Bits b : sets[a]) {
      if (b >= table.size()) throw std::invalid_argument("from_sets: bitstring out of range");
      if (table[b] != -1) {
        throw std::invalid_argument("from_sets: bitstring " + format_bitstring(b, n) +
                                    " appears in more than one set");
      }
      table[b] = static_cast<int>(a);
    }
  }
  for (std::size_t b = 0; b < table.size(); ++b) {
    if (table[b] == -1) {
      throw std::invalid_argument("from_sets: bitstring " + format_bitstring(b, n) +
                                  " is not covered");
    }
  }
  return explicit_table(n, static_cast<int>(sets.size()), std::move(table));
}

int PostProcessing::decode(Bits bits) const {
  if (n_ < 64 && (bits >> n_) != 0) {
    throw std::invalid_argument("decode: bitstring wider than " + std::to_string(n_) + " bits");
  }
  switch (kind_) {
    case DecodeKind::MsbLocal:
      return static_cast<int>((bits >> (n_ - 1)) & 1);
    case DecodeKind::QLocalParity:
      return parity(bits >> (n_ - q_));
    case DecodeKind::GlobalRecursive: {
      const int m = std::countr_zero(static_cast<unsigned>(m_)) - 1;
      int action = 0;
      for (int k = 0; k < m; ++k) action = (action << 1) | static_cast<int>((bits >> k) & 1);
      return (action << 1) | parity(bits >> m);
    }
    case DecodeKind::ExplicitTable:
      return table_.at(bits);
  }
  throw std::logic_error("decode: unknown kind");
}

int PostProcessing::decode(std::string_view bitstring) const {
  return decode(parse_bitstring(bitstring, n_));
}

std::vector<int> PostProcessing::table() const {
  if (kind_ == DecodeKind::ExplicitTable) return table_;
  check_qubits(n_, kMaxTableQubits, "table");
  std::vector<int> out(std::size_t{1} << n_);
  for (Bits b = 0; b < out.size(); ++b) out[b] = decode(b);
  return out;
}

bool PostProcessing::is_balanced() const {
  if (kind_ != DecodeKind::ExplicitTable) return true;
  if (table_.size() % static_cast<std::size_t>(m_) != 0) return false;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(m_), 0);
  for (int a : table_) ++sizes[static_cast<std::size_t>(a)];
  const std::size_t want = table_.size() / static_cast<std::size_t>(m_);
  return std::all_of(sizes.begin(), sizes.end(), [want](std::size_t s) { return s == want; });
}

std::string PostProcessing::describe() const {
  std::ostringstream out;
  out << to_string(kind_) << "(n=" << n_ << ", M=" << m_;
  if (kind_ == DecodeKind::QLocalParity) out << ", q=" << q_;
  out << ')';
  return out.str();
}

bool recursive_partition_contains(int n, int level, unsigned action, Bits bits) {
  if (level == 0) return static_cast<unsigned>(parity(bits & ((Bits{1} << n) - 1))) == action;
  const unsigned a0 = action & 1U;
  if (static_cast<unsigned>(parity(bits >> level)) != a0) return false;
  const unsigned next = ((action >> 2) << 1) | (((action >> 1) & 1U) ^ a0);
  return recursive_partition_contains(n, level - 1, next, bits);
}

std::vector<std::vector<Bits>> partition_sets(int n, int num_actions) {
  check_qubits(n, kMaxEiQubits, "partition_sets");
  // Validates M against n.
  (void)PostProcessing::global_recursive(n, num_actions);
  const int level = std::countr_zero(static_cast<unsigned>(num_actions)) - 1;
  std::vector<std::vector<Bits>> sets(static_cast<std::size_t>(num_actions));
  for (unsigned a = 0; a < static_cast<unsigned>(num_actions); ++a) {
    for (Bits b = 0; b < (Bits{1} << n); ++b) {
      if (recursive_partition_contains(n, level, a, b)) sets[a].push_back(b);
    }
  }
  return sets;
}

int extracted_information(const PostProcessing& fn, Bits bits) {
  const int n = fn.num_qubits();
  check_qubits(n, kMaxEiQubits, "extracted_information");
  const Bits full = (Bits{1} << n) - 1;
  const int target = fn.decode(bits);
  for (int k = 0; k <= n; ++k) {
    for (Bits fixed = 0; fixed <= full; ++fixed) {
      if (std::popcount(fixed) != k) continue;
      const Bits free = full & ~fixed;
      const Bits base = bits & fixed;
      bool determined = true;
      // Walk every assignment of the free positions.
      Bits sub = free;
      while (true) {
        if (fn.decode(base | sub) != target) {
          determined = false;
          break;
        }
        if (sub == 0) break;
        sub = (sub - 1) & free;
      }
      if (determined) return k;
    }
  }
  return n;
}

namespace {

// Pattern p over subset S: bit r of p is the value of the r-th lowest member of S.
inline std::uint32_t insert_bit(std::uint32_t p, int rank, std::uint32_t bit) {
  const std::uint32_t low = p & ((1U << rank) - 1U);
  return low | (bit << rank) | ((p >> rank) << (rank + 1));
}

inline std::uint32_t remove_bit(std::uint32_t p, int rank) {
  const std::uint32_t low = p & ((1U << rank) - 1U);
  return low | ((p >> (rank + 1)) << rank);
}

}  // namespace

std::vector<int> extracted_information_table(const PostProcessing& fn) {
  const int n = fn.num_qubits();
  check_qubits(n, kMaxEiQubits, "extracted_information_table");
  const std::uint32_t full = (1U << n) - 1U;
  const std::size_t subsets = std::size_t{1} << n;

  std::vector<std::size_t> offset(subsets + 1, 0);
  for (std::size_t s = 0; s < subsets; ++s) {
    offset[s + 1] = offset[s] + (std::size_t{1} << std::popcount(static_cast<std::uint32_t>(s)));
  }

  // value[S][p]: the action if f is constant on the cube fixing S to p, else -1.
  std::vector<std::int32_t> value(offset[subsets]);
  {
    const auto table = fn.table();
    std::copy(table.begin(), table.end(), value.begin() + static_cast<std::ptrdiff_t>(offset[full]));
  }
  for (std::uint32_t s = full; s-- > 0;) {
    const int i = std::countr_one(s);
    const std::uint32_t t = s | (1U << i);
    const int rank = std::popcount(t & ((1U << i) - 1U));
    const std::size_t count = std::size_t{1} << std::popcount(s);
    const std::int32_t* parent = value.data() + offset[t];
    std::int32_t* out = value.data() + offset[s];
    for (std::uint32_t p = 0; p < count; ++p) {
      const std::int32_t v0 = parent[insert_bit(p, rank, 0)];
      const std::int32_t v1 = parent[insert_bit(p, rank, 1)];
      out[p] = (v0 == v1) ? v0 : -1;
    }
  }

  // best[S][p]: fewest positions inside S that fix f on the cube (S, p).
  constexpr std::uint8_t kUnset = std::numeric_limits<std::uint8_t>::max();
  std::vector<std::uint8_t> best(offset[subsets], kUnset);
  for (std::uint32_t s = 0; s <= full; ++s) {
    const int size = std::popcount(s);
    const std::size_t count = std::size_t{1} << size;
    std::uint8_t* out = best.data() + offset[s];
    const std::int32_t* vals = value.data() + offset[s];
    for (std::uint32_t p = 0; p < count; ++p) {
      out[p] = vals[p] >= 0 ? static_cast<std::uint8_t>(size) : kUnset;
    }
    for (std::uint32_t rest = s; rest; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      const std::uint32_t child = s & ~(1U << i);
      const int rank = std::popcount(s & ((1U << i) - 1U));
      const std::uint8_t* sub = best.data() + offset[child];
      for (std::uint32_t p = 0; p < count; ++p) {
        out[p] = std::min(out[p], sub[remove_bit(p, rank)]);
      }
    }
  }

  std::vector<int> ei(subsets);
  const std::uint8_t* top = best.data() + offset[full];
  for (std::size_t b = 0; b < subsets; ++b) ei[b] = top[b];
  return ei;
}

Rational Rational::reduced() const {
  const std::int64_t g = std::gcd(num, den);
  return g == 0 ? *this : Rational{num / g, den / g};
}

std::string Rational::str() const {
  const auto r = reduced();
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

GlobalityReport globality(const PostProcessing& fn) {
  GlobalityReport report{fn.num_qubits(), fn.num_actions(), extracted_information_table(fn), 0};
  for (int e : report.extracted_info) report.ei_total += static_cast<std::uint64_t>(e);
  const std::uint64_t strings = std::uint64_t{1} << fn.num_qubits();
  if (report.ei_total > strings * static_cast<std::uint64_t>(fn.num_qubits())) {
    throw std::logic_error("globality exceeds n");
  }
  if (fn.is_balanced()) {
    const double lower = std::log2(static_cast<double>(fn.num_actions()));
    if (report.value() < lower - 1e-12) throw std::logic_error("globality below log2(M)");
  }
  return report;
}

BigInt count_balanced_partitionings(int n, int num_actions) {
  if (n < 1 || n > 20) throw std::out_of_range("count_balanced_partitionings: n outside [1, 20]");
  const std::uint64_t strings = std::uint64_t{1} << n;
  if (num_actions < 1 || strings % static_cast<std::uint64_t>(num_actions) != 0) {
    throw std::invalid_argument("count_balanced_partitionings: M must divide 2^n");
  }
  auto factorial = [](std::uint64_t k) {
    BigInt r = 1;
    for (std::uint64_t i = 2; i <= k; ++i) r *= i;
    return r;
  };
  const std::uint64_t block = strings / static_cast<std::uint64_t>(num_actions);
  BigInt denom = factorial(static_cast<std::uint64_t>(num_actions));
  const BigInt block_fact = factorial(block);
  for (int a = 0; a < num_actions; ++a) denom *= block_fact;
  return factorial(strings) / denom;
}

namespace {

void check_histogram_args(int n, int num_actions) {
  check_qubits(n, kMaxEiQubits, "globality_histogram");
  if (num_actions < 1 || ((std::uint64_t{1} << n) % static_cast<std::uint64_t>(num_actions)) != 0) {
    throw std::invalid_argument("globality_histogram: M must divide 2^n");
  }
}

std::uint64_t ei_sum(int n, int num_actions, const std::vector<int>& table) {
  const auto fn = PostProcessing::explicit_table(n, num_actions, table);
  const auto ei = extracted_information_table(fn);
  return std::accumulate(ei.begin(), ei.end(), std::uint64_t{0});
}

}  // namespace

GlobalityHistogram globality_histogram_exhaustive(int n, int num_actions) {
  check_histogram_args(n, num_actions);
  if (count_balanced_partitionings(n, num_actions) > kMaxExhaustivePartitionings) {
    throw std::invalid_argument("globality_histogram: exhaustive enumeration of n=" +
                                std::to_string(n) + ", M=" + std::to_string(num_actions) +
                                " exceeds " + std::to_string(kMaxExhaustivePartitionings) +
                                " partitionings; use sampling");
  }
  GlobalityHistogram hist{n, num_actions, {}, 0, true};
  const int strings = 1 << n;
  const int block = strings / num_actions;
  std::vector<int> table(static_cast<std::size_t>(strings), -1);

  // Canonical form: block a always contains the smallest string not placed in
  // blocks 0..a-1, which removes the M! relabelings.
  auto fill = [&](auto&& self, int action, int filled, int next_candidate) -> void {
    if (filled == block) {
      if (action + 1 == num_actions) {
        const auto total = ei_sum(n, num_actions, table);
        ++hist.counts[total];
        ++hist.total;
        return;
      }
      const auto first = std::find(table.begin(), table.end(), -1) - table.begin();
      table[static_cast<std::size_t>(first)] = action + 1;
      self(self, action + 1, 1, static_cast<int>(first) + 1);
      table[static_cast<std::size_t>(first)] = -1;
      return;
    }
    const int remaining = block - filled;
    for (int b = next_candidate; b < strings; ++b) {
      if (table[static_cast<std::size_t>(b)] != -1) continue;
      // Not enough free strings left above b to finish this block.
      int free_after = 0;
      for (int c = b; c < strings && free_after < remaining; ++c) {
        free_after += table[static_cast<std::size_t>(c)] == -1;
      }
      if (free_after < remaining) break;
      table[static_cast<std::size_t>(b)] = action;
      self(self, action, filled + 1, b + 1);
      table[static_cast<std::size_t>(b)] = -1;
    }
  };
  table[0] = 0;
  fill(fill, 0, 1, 1);
  return hist;
}

GlobalityHistogram globality_histogram_sampled(int n, int num_actions, std::uint64_t samples,
                                               Rng& rng) {
  check_histogram_args(n, num_actions);
  if (samples == 0) throw std::invalid_argument("globality_histogram: samples must be >= 1");
  GlobalityHistogram hist{n, num_actions, {}, 0, false};
  const std::size_t strings = std::size_t{1} << n;
  const std::size_t block = strings / static_cast<std::size_t>(num_actions);
  std::vector<int> order(strings);
  std::vector<int> table(strings);
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with the portable generator.
    for (std::size_t i = strings - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
    for (std::size_t i = 0; i < strings; ++i) {
      table[static_cast<std::size_t>(order[i])] = static_cast<int>(i / block);
    }
    ++hist.counts[ei_sum(n, num_actions, table)];
    ++hist.total;
  }
  return hist;
}

PostProcessing read_table(std::istream& in) {
  std::vector<std::pair<std::string, int>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("table line " + std::to_string(line_no) + ": expected 'bits,action'");
    }
    int action = 0;
    try {
      action = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("table line " + std::to_string(line_no) + ": bad action");
    }
    rows.emplace_back(line.substr(0, comma), action);
  }
  if (rows.empty()) throw std::invalid_argument("table: no entries");
  const int n = static_cast<int>(rows.front().first.size());
  check_qubits(n, PostProcessing::kMaxTableQubits, "table");
  int num_actions = 0;
  for (const auto& [bits, action] : rows) num_actions = std::max(num_actions, action + 1);
  std::vector<std::vector<Bits>> sets(static_cast<std::size_t>(num_actions));
  for (const auto& [bits, action] : rows) {
    if (action < 0) throw std::invalid_argument("table: negative action");
    sets[static_cast<std::size_t>(action)].push_back(parse_bitstring(bits, n));
  }
  return PostProcessing::from_sets(n, sets);
}

void write_table(std::ostream& out, const PostProcessing& fn) {
  const auto table = fn.table();
  for (Bits b = 0; b < table.size(); ++b) {
    out << format_bitstring(b, fn.num_qubits()) << ',' << table[b] << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const GlobalityHistogram& hist) {
  out << "g_value,count\n";
  for (const auto& [total, count] : hist.counts) {
    out << format_double(hist.g_value(total)) << ',' << count << '\n';
  }
}

}  // namespace qpg
