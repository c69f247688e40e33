#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "qpg/decode.hpp"

using namespace qpg;

namespace {

// Minimum number of positions that, fixed to b's values, force f. Tries
// every subset of positions.
int brute_ei(const PostProcessing& f, Bits b) {
  const int n = f.num_qubits();
  const Bits full = (Bits{1} << n) - 1;
  int best = n;
  for (Bits mask = 0; mask <= full; ++mask) {
    const int size = __builtin_popcountll(mask);
    if (size >= best) continue;
    const int want = f.decode(b);
    bool ok = true;
    for (Bits other = 0; other <= full && ok; ++other) {
      if ((other & mask) == (b & mask) && f.decode(other) != want) ok = false;
    }
    if (ok) best = size;
  }
  return best;
}

// Set-valued recursion: C^(m)_a built from C^(m-1), bits b_{n-1}..b_0.
std::set<Bits> recursive_set(int n, int m, unsigned a) {
  std::set<Bits> out;
  for (Bits b = 0; b < (Bits{1} << n); ++b) {
    int p = 0;
    for (int i = (m == 0 ? 0 : m); i < n; ++i) p ^= static_cast<int>((b >> i) & 1);
    if (m == 0) {
      if (static_cast<unsigned>(p) == a) out.insert(b);
      continue;
    }
    const unsigned a0 = a & 1, a1 = (a >> 1) & 1;
    if (static_cast<unsigned>(p) != a0) continue;
    const unsigned parent = ((a >> 2) << 1) | (a1 ^ a0);
    if (recursive_set(n, m - 1, parent).count(b)) out.insert(b);
  }
  return out;
}

boost::multiprecision::cpp_int factorial(int k) {
  boost::multiprecision::cpp_int r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

TEST_CASE("bitstrings are read most significant first") {
  CHECK(parse_bitstring("1001", 4) == 9);
  CHECK(parse_bitstring("0001", 4) == 1);
  CHECK(format_bitstring(9, 4) == "1001");
  CHECK(format_bitstring(1, 6) == "000001");
  CHECK_THROWS(parse_bitstring("102", 3));
  CHECK_THROWS(parse_bitstring("10", 3));
}

TEST_CASE("msb and parity decoding") {
  const auto msb = PostProcessing::msb_local(4);
  CHECK(msb.decode("1000") == 1);
  CHECK(msb.decode("0111") == 0);
  const auto par2 = PostProcessing::qlocal_parity(4, 2);
  CHECK(par2.decode("1100") == 0);
  CHECK(par2.decode("1011") == 1);
  CHECK(par2.decode("0011") == 0);
  const auto full = PostProcessing::qlocal_parity(4, 4);
  CHECK(full.decode("0111") == 1);
  CHECK_THROWS(PostProcessing::qlocal_parity(4, 5));
  CHECK_THROWS(PostProcessing::qlocal_parity(4, 0));
}

TEST_CASE("global decoding worked examples") {
  CHECK(PostProcessing::global_recursive(4, 8).decode("1001") == 5);
  const auto m4 = PostProcessing::global_recursive(4, 4);
  std::set<std::string> zero;
  for (Bits b = 0; b < 16; ++b)
    if (m4.decode(b) == 0) zero.insert(format_bitstring(b, 4));
  CHECK(zero == std::set<std::string>{"0000", "0110", "1010", "1100"});
  const auto m8 = PostProcessing::global_recursive(4, 8);
  std::set<std::string> five;
  for (Bits b = 0; b < 16; ++b)
    if (m8.decode(b) == 5) five.insert(format_bitstring(b, 4));
  CHECK(five == std::set<std::string>{"0101", "1001"});
  CHECK_THROWS(PostProcessing::global_recursive(4, 3));
  CHECK_THROWS(PostProcessing::global_recursive(2, 8));
}

TEST_CASE("closed form agrees with the set recursion") {
  for (int n = 2; n <= 7; ++n) {
    for (int M : {2, 4, 8}) {
      if (M > (1 << n)) continue;
      const auto f = PostProcessing::global_recursive(n, M);
      const int m = __builtin_ctz(static_cast<unsigned>(M)) - 1;
      for (unsigned a = 0; a < static_cast<unsigned>(M); ++a) {
        const auto set = recursive_set(n, m, a);
        for (Bits b = 0; b < (Bits{1} << n); ++b) {
          CHECK((f.decode(b) == static_cast<int>(a)) == (set.count(b) == 1));
          CHECK(recursive_partition_contains(n, m, a, b) == (set.count(b) == 1));
        }
      }
      const auto sets = partition_sets(n, M);
      for (const auto& s : sets) CHECK(s.size() == (std::size_t{1} << n) / static_cast<std::size_t>(M));
    }
  }
}

TEST_CASE("extracted information matches subset brute force") {
  Rng rng(2);
  std::vector<PostProcessing> fns{PostProcessing::msb_local(4), PostProcessing::qlocal_parity(4, 3),
                                  PostProcessing::global_recursive(4, 4),
                                  PostProcessing::global_recursive(5, 8)};
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<int> t(16);
    for (auto& v : t) v = static_cast<int>(rng.below(3));
    fns.push_back(PostProcessing::explicit_table(4, 3, t));
  }
  for (const auto& f : fns) {
    const auto table = extracted_information_table(f);
    for (Bits b = 0; b < (Bits{1} << f.num_qubits()); ++b) {
      const int want = brute_ei(f, b);
      CHECK(extracted_information(f, b) == want);
      CHECK(table[b] == want);
    }
  }
}

TEST_CASE("worked 4-action example: EI(0111) = 2 and G = 2.5") {
  std::ifstream in(QPG_DATA_DIR "/example_4q_4a.table");
  REQUIRE(in);
  const auto f = read_table(in);
  CHECK(extracted_information(f, parse_bitstring("0111", 4)) == 2);
  const auto g = globality(f);
  CHECK(g.exact() == Rational{5, 2});
}

TEST_CASE("globality of the reference families") {
  CHECK(globality(PostProcessing::msb_local(4)).exact() == Rational{1, 1});
  for (int n = 2; n <= 6; ++n) {
    for (int q = 1; q <= n; ++q) {
      CHECK(globality(PostProcessing::qlocal_parity(n, q)).exact() == Rational{q, 1});
    }
    for (int M : {2, 4}) {
      if (M > (1 << n)) continue;
      CHECK(globality(PostProcessing::global_recursive(n, M)).exact() == Rational{n, 1});
    }
  }
  std::ifstream in(QPG_DATA_DIR "/g35_4q_2a.table");
  REQUIRE(in);
  CHECK(globality(read_table(in)).exact() == Rational{7, 2});
}

TEST_CASE("balanced partition counts follow the multinomial formula") {
  for (auto [n, M] : {std::pair{2, 2}, {3, 2}, {3, 4}, {4, 2}, {4, 4}, {6, 4}}) {
    const int N = 1 << n;
    auto want = factorial(N) / (factorial(M) * boost::multiprecision::pow(factorial(N / M), M));
    CHECK(count_balanced_partitionings(n, M) == want);
  }
  CHECK(count_balanced_partitionings(2, 2) == 3);
  CHECK(count_balanced_partitionings(4, 2) == 6435);
}

TEST_CASE("exhaustive histogram covers every partitioning once") {
  const auto h = globality_histogram_exhaustive(3, 2);
  CHECK(h.exhaustive);
  CHECK(h.total == 35);
  std::uint64_t sum = 0;
  for (const auto& [k, c] : h.counts) sum += c;
  CHECK(sum == 35);
  const auto h4 = globality_histogram_exhaustive(4, 2);
  CHECK(h4.total == 6435);
  CHECK(h4.counts.at(64) == 1);  // G = 4 means total EI 4 * 16
  CHECK(h4.counts.rbegin()->first == 64);
  CHECK(h4.counts.begin()->first == 16);
  CHECK(h4.counts.begin()->second == 4);  // one single-bit split per qubit
}

TEST_CASE("exhaustive request beyond the cap is rejected") {
  CHECK_THROWS(globality_histogram_exhaustive(6, 4));
}

TEST_CASE("sampled histogram is reproducible and bounded") {
  Rng a(17), b(17);
  const auto h1 = globality_histogram_sampled(6, 4, 200, a);
  const auto h2 = globality_histogram_sampled(6, 4, 200, b);
  CHECK(h1.counts == h2.counts);
  CHECK(h1.total == 200);
  CHECK_FALSE(h1.exhaustive);
  for (const auto& [k, c] : h1.counts) {
    CHECK(h1.g_value(k) >= 2.0);  // log2(4) bits are always needed
    CHECK(h1.g_value(k) <= 6.0);
  }
}

TEST_CASE("table file round trip and validation") {
  const auto f = PostProcessing::global_recursive(3, 4);
  std::stringstream io;
  write_table(io, f);
  const auto back = read_table(io);
  CHECK(back.table() == f.table());
  std::stringstream missing("000,0\n001,1\n");
  CHECK_THROWS(read_table(missing));  // 2 of 8 entries
  std::stringstream dup("00,0\n00,1\n01,0\n10,1\n11,0\n");
  CHECK_THROWS(read_table(dup));
  std::stringstream junk("00;0\n");
  CHECK_THROWS(read_table(junk));
}

TEST_CASE("unbalanced tables are flagged") {
  const auto f = PostProcessing::explicit_table(2, 2, {0, 0, 0, 1});
  CHECK_FALSE(f.is_balanced());
  CHECK(PostProcessing::global_recursive(3, 2).is_balanced());
}
