#include "ursqs/coding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace ursqs {

CodeMatrix::CodeMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), stride_((cols + 63) / 64), words_(rows * stride_, 0) {}

CodeMatrix CodeMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) throw std::invalid_argument("CodeMatrix: no rows");
  CodeMatrix g(rows.size(), rows.front().size());
  for (std::size_t l = 0; l < rows.size(); ++l) {
    if (rows[l].size() != g.cols()) throw std::invalid_argument("CodeMatrix: ragged rows");
    for (std::size_t j = 0; j < g.cols(); ++j) {
      if (rows[l][j] != 0 && rows[l][j] != 1) throw std::invalid_argument("CodeMatrix: entries must be 0/1");
      g.set(l, j, rows[l][j] == 1);
    }
  }
  return g;
}

void CodeMatrix::set(std::size_t row, std::size_t col, bool bit) {
  std::uint64_t& w = words_[row * stride_ + col / 64];
  const std::uint64_t mask = std::uint64_t{1} << (col % 64);
  w = bit ? (w | mask) : (w & ~mask);
}

bool CodeMatrix::distinct_rows() const {
  std::vector<std::span<const std::uint64_t>> all;
  for (std::size_t l = 0; l < rows_; ++l) all.push_back(row_words(l));
  std::sort(all.begin(), all.end(), [](auto a, auto b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  for (std::size_t l = 1; l < all.size(); ++l)
    if (std::equal(all[l].begin(), all[l].end(), all[l - 1].begin())) return false;
  return true;
}

std::vector<std::vector<int>> CodeMatrix::to_rows() const {
  std::vector<std::vector<int>> out(rows_, std::vector<int>(cols_, 0));
  for (std::size_t l = 0; l < rows_; ++l)
    for (std::size_t j = 0; j < cols_; ++j) out[l][j] = get(l, j) ? 1 : 0;
  return out;
}

BinaryQuestion column_question(const CodeMatrix& g, std::size_t col) {
  if (col >= g.cols()) throw std::out_of_range("column_question: worker index out of range");
  BinaryQuestion b;
  for (std::size_t l = 0; l < g.rows(); ++l) (g.get(l, col) ? b.one : b.zero).push_back(l);
  return b;
}

namespace {

std::size_t column_ones(const CodeMatrix& g, std::size_t col) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < g.rows(); ++l) n += g.get(l, col) ? 1 : 0;
  return n;
}

double one_prob(bool own, std::size_t ones, std::size_t q, double mu) {
  const double others = static_cast<double>(ones - (own ? 1 : 0));
  return mu * (own ? 1.0 : 0.0) + (1.0 - mu) / static_cast<double>(q - 1) * others;
}

std::vector<std::uint64_t> pack(std::span<const std::uint8_t> u, std::size_t words) {
  std::vector<std::uint64_t> out(words, 0);
  for (std::size_t j = 0; j < u.size(); ++j)
    if (u[j]) out[j / 64] |= std::uint64_t{1} << (j % 64);
  return out;
}

std::size_t distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  return d;
}

// P(u | part) for all u in [0, 2^N), bit j of u being worker j's report.
void response_table(const CodeMatrix& g, std::size_t part, double mu, std::vector<double>& table) {
  const std::size_t n = g.cols();
  table.assign(std::size_t{1} << n, 0.0);
  table[0] = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = one_prob(g.get(part, j), column_ones(g, j), g.rows(), mu);
    const std::size_t half = std::size_t{1} << j;
    for (std::size_t u = 0; u < half; ++u) {
      table[u | half] = table[u] * p;
      table[u] *= 1.0 - p;
    }
  }
}

void check_exact(const CodeMatrix& g, double mu) {
  if (g.cols() > kMaxExactWorkers)
    throw std::invalid_argument("performance_matrix: N=" + std::to_string(g.cols()) + " exceeds " +
                                std::to_string(kMaxExactWorkers));
  if (g.rows() < 2) throw std::invalid_argument("performance_matrix: need q >= 2");
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("performance_matrix: mu outside [0,1]");
}

// Average decoding error, computing only the diagonal of the channel.
double exact_cost(const CodeMatrix& g, double mu, std::vector<double>& table,
                  std::vector<std::uint8_t>& best, std::vector<std::uint16_t>& ties) {
  const std::size_t q = g.rows();
  const std::size_t space = std::size_t{1} << g.cols();
  best.assign(space, 0xff);
  ties.assign(space, 0);
  for (std::size_t u = 0; u < space; ++u) {
    for (std::size_t l = 0; l < q; ++l) {
      const auto d = static_cast<std::uint8_t>(std::popcount(g.row_words(l)[0] ^ u));
      if (d < best[u]) {
        best[u] = d;
        ties[u] = 1;
      } else if (d == best[u]) {
        ++ties[u];
      }
    }
  }
  double hit = 0.0;
  for (std::size_t l = 0; l < q; ++l) {
    response_table(g, l, mu, table);
    const std::uint64_t row = g.row_words(l)[0];
    for (std::size_t u = 0; u < space; ++u)
      if (std::popcount(row ^ u) == best[u]) hit += table[u] / ties[u];
  }
  return 1.0 - hit / static_cast<double>(q);
}

}  // namespace

double bit_one_probability(const CodeMatrix& g, std::size_t part, std::size_t col, double mu) {
  if (part >= g.rows() || col >= g.cols()) throw std::out_of_range("bit_one_probability: index out of range");
  return one_prob(g.get(part, col), column_ones(g, col), g.rows(), mu);
}

double response_vector_prob(const CodeMatrix& g, std::size_t part, double mu, std::span<const std::uint8_t> u) {
  if (part >= g.rows()) throw std::out_of_range("response_vector_prob: part out of range");
  if (u.size() != g.cols()) throw std::invalid_argument("response_vector_prob: length mismatch");
  double prob = 1.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double p = bit_one_probability(g, part, j, mu);
    const double i = u[j] ? 1.0 : 0.0;
    prob *= 1.0 - i + (2.0 * i - 1.0) * p;
  }
  return prob;
}

std::size_t hamming_decode(const CodeMatrix& g, std::span<const std::uint8_t> u, Rng& rng) {
  if (u.size() != g.cols()) throw std::invalid_argument("hamming_decode: length mismatch");
  const auto packed = pack(u, g.words_per_row());
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> winners;
  for (std::size_t l = 0; l < g.rows(); ++l) {
    const std::size_t d = distance(g.row_words(l), packed);
    if (d < best) {
      best = d;
      winners.assign(1, l);
    } else if (d == best) {
      winners.push_back(l);
    }
  }
  if (winners.size() == 1) return winners.front();
  return winners[std::uniform_int_distribution<std::size_t>(0, winners.size() - 1)(rng)];
}

double PerformanceMatrix::min_diagonal() const {
  double m = 1.0;
  for (std::size_t l = 0; l < q_; ++l) m = std::min(m, at(l, l));
  return m;
}

double PerformanceMatrix::average_error() const {
  double err = 0.0;
  for (std::size_t l = 0; l < q_; ++l)
    for (std::size_t o = 0; o < q_; ++o)
      if (o != l) err += at(l, o);
  return err / static_cast<double>(q_);
}

PerformanceMatrix performance_matrix(const CodeMatrix& g, double mu) {
  check_exact(g, mu);
  const std::size_t q = g.rows();
  const std::size_t space = std::size_t{1} << g.cols();

  // Winners of every response vector, stored CSR-style.
  std::vector<std::size_t> offsets(space + 1, 0);
  std::vector<std::uint32_t> winners;
  for (std::size_t u = 0; u < space; ++u) {
    int best = std::numeric_limits<int>::max();
    const std::size_t start = winners.size();
    for (std::size_t l = 0; l < q; ++l) {
      const int d = std::popcount(g.row_words(l)[0] ^ u);
      if (d < best) {
        best = d;
        winners.resize(start);
      }
      if (d == best) winners.push_back(static_cast<std::uint32_t>(l));
    }
    offsets[u + 1] = winners.size();
  }

  PerformanceMatrix p(q);
  std::vector<double> table;
  for (std::size_t l = 0; l < q; ++l) {
    response_table(g, l, mu, table);
    for (std::size_t u = 0; u < space; ++u) {
      const std::size_t n = offsets[u + 1] - offsets[u];
      const double share = table[u] / static_cast<double>(n);
      for (std::size_t k = offsets[u]; k < offsets[u + 1]; ++k) p.at(l, winners[k]) += share;
    }
  }
  return p;
}

double union_bound_cost(const CodeMatrix& g, double mu) {
  const std::size_t q = g.rows();
  double total = 0.0;
  std::vector<double> p(q);
  std::vector<double> log_bc(q * q, 0.0);
  for (std::size_t j = 0; j < g.cols(); ++j) {
    const std::size_t ones = column_ones(g, j);
    for (std::size_t l = 0; l < q; ++l) p[l] = one_prob(g.get(l, j), ones, q, mu);
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t k = l + 1; k < q; ++k) {
        const double bc = std::sqrt(p[l] * p[k]) + std::sqrt((1 - p[l]) * (1 - p[k]));
        log_bc[l * q + k] += std::log(std::max(bc, 1e-300));
      }
  }
  for (std::size_t l = 0; l < q; ++l)
    for (std::size_t k = l + 1; k < q; ++k) total += 2.0 * std::exp(log_bc[l * q + k]);
  return total;
}

namespace {

CodeMatrix random_distinct(std::size_t q, std::size_t n, Rng& rng) {
  CodeMatrix g(q, n);
  std::bernoulli_distribution coin(0.5);
  do {
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t j = 0; j < n; ++j) g.set(l, j, coin(rng));
  } while (!g.distinct_rows());
  return g;
}

using Column = std::vector<std::uint8_t>;

void set_column(CodeMatrix& g, std::size_t col, const Column& value) {
  for (std::size_t l = 0; l < g.rows(); ++l) g.set(l, col, value[l] != 0);
}

Column get_column(const CodeMatrix& g, std::size_t col) {
  Column v(g.rows());
  for (std::size_t l = 0; l < g.rows(); ++l) v[l] = g.get(l, col) ? 1 : 0;
  return v;
}

CodeSearchResult exhaustive_search(std::size_t q, std::size_t n, double mu) {
  CodeSearchResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<double> table;
  std::vector<std::uint8_t> md;
  std::vector<std::uint16_t> ties;
  const std::uint64_t count = std::uint64_t{1} << (q * n);
  CodeMatrix g(q, n);
  for (std::uint64_t code = 0; code < count; ++code) {
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t j = 0; j < n; ++j) g.set(l, j, (code >> (l * n + j)) & 1U);
    if (!g.distinct_rows()) continue;
    const double c = exact_cost(g, mu, table, md, ties);
    if (c < best.cost - 1e-15) best = {g, c, true};
  }
  return best;
}

// Columns are full-width candidates when 2^q is small, otherwise single-entry
// flips plus a few random columns.
std::vector<Column> column_candidates(const Column& current, std::size_t q, Rng& rng) {
  std::vector<Column> out;
  if (q <= 6) {
    for (std::uint32_t v = 0; v < (1U << q); ++v) {
      Column c(q);
      for (std::size_t l = 0; l < q; ++l) c[l] = (v >> l) & 1U;
      if (c != current) out.push_back(std::move(c));
    }
    return out;
  }
  for (std::size_t l = 0; l < q; ++l) {
    out.push_back(current);
    out.back()[l] ^= 1U;
  }
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < 16; ++k) {
    Column c(q);
    for (auto& bit : c) bit = coin(rng) ? 1 : 0;
    out.push_back(std::move(c));
  }
  return out;
}

CodeSearchResult descent_exact(std::size_t q, std::size_t n, double mu, Rng& rng,
                               const CodeSearchOptions& opts) {
  const double eval_work = 3.0 * static_cast<double>(q) * static_cast<double>(std::size_t{1} << n);
  double work = 0.0;
  std::vector<double> table;
  std::vector<std::uint8_t> md;
  std::vector<std::uint16_t> ties;
  CodeSearchResult best;
  best.cost = std::numeric_limits<double>::infinity();

  const std::uint64_t base = rng();
  for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
    if (r > 0 && work > opts.work_budget) break;
    Rng local = make_stream(base, r);
    CodeMatrix g = random_distinct(q, n, local);
    double cost = exact_cost(g, mu, table, md, ties);
    double proxy = union_bound_cost(g, mu);
    work += eval_work;
    for (std::size_t sweep = 0; sweep < opts.max_sweeps && work <= opts.work_budget; ++sweep) {
      bool improved = false;
      for (std::size_t j = 0; j < n; ++j) {
        const Column current = get_column(g, j);
        Column chosen = current;
        for (const Column& v : column_candidates(current, q, local)) {
          set_column(g, j, v);
          if (!g.distinct_rows()) continue;
          const double c = exact_cost(g, mu, table, md, ties);
          work += eval_work;
          if (c > cost + 1e-12) continue;
          // Equal exact cost: move only if the smooth proxy improves, which
          // walks off plateaus such as odd/even repetition counts.
          const double px = union_bound_cost(g, mu);
          if (c < cost - 1e-12 || px < proxy * (1.0 - 1e-9)) {
            cost = c;
            proxy = px;
            chosen = v;
          }
        }
        set_column(g, j, chosen);
        improved |= chosen != current;
      }
      if (!improved) break;
    }
    if (cost < best.cost - 1e-15) best = {g, cost, true};
  }
  return best;
}

// Single-entry flips scored with the union-bound proxy, updated per column.
CodeSearchResult descent_proxy(std::size_t q, std::size_t n, double mu, Rng& rng,
                               const CodeSearchOptions& opts) {
  const auto pair_count = q * q;
  double work = 0.0;
  CodeSearchResult best;
  best.cost = std::numeric_limits<double>::infinity();
  best.exact = false;

  auto column_logs = [&](const CodeMatrix& g, std::size_t j, std::vector<double>& out) {
    std::vector<double> p(q);
    const std::size_t ones = column_ones(g, j);
    for (std::size_t l = 0; l < q; ++l) p[l] = one_prob(g.get(l, j), ones, q, mu);
    out.assign(pair_count, 0.0);
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t k = l + 1; k < q; ++k)
        out[l * q + k] = std::log(std::max(std::sqrt(p[l] * p[k]) + std::sqrt((1 - p[l]) * (1 - p[k])), 1e-300));
  };
  auto total_of = [&](const std::vector<double>& logs) {
    double t = 0.0;
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t k = l + 1; k < q; ++k) t += 2.0 * std::exp(logs[l * q + k]);
    return t;
  };

  const std::uint64_t base = rng();
  for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
    if (r > 0 && work > opts.work_budget) break;
    Rng local = make_stream(base, r);
    CodeMatrix g = random_distinct(q, n, local);
    std::vector<std::vector<double>> cols(n);
    std::vector<double> sum(pair_count, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      column_logs(g, j, cols[j]);
      for (std::size_t i = 0; i < pair_count; ++i) sum[i] += cols[j][i];
    }
    double cost = total_of(sum);
    std::vector<double> trial_col, trial_sum(pair_count);
    for (std::size_t sweep = 0; sweep < opts.max_sweeps && work <= opts.work_budget; ++sweep) {
      bool improved = false;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < q; ++l) {
          g.flip(l, j);
          work += 3.0 * static_cast<double>(pair_count);
          if (g.distinct_rows()) {
            column_logs(g, j, trial_col);
            for (std::size_t i = 0; i < pair_count; ++i) trial_sum[i] = sum[i] - cols[j][i] + trial_col[i];
            const double c = total_of(trial_sum);
            if (c < cost * (1 - 1e-12)) {
              cost = c;
              sum = trial_sum;
              cols[j] = trial_col;
              improved = true;
              continue;
            }
          }
          g.flip(l, j);
        }
      }
      if (!improved) break;
    }
    if (cost < best.cost) best = {g, cost, false};
  }
  return best;
}

}  // namespace

CodeSearchResult search_code_matrix(std::size_t q, std::size_t workers, double mu, Rng& rng,
                                    const CodeSearchOptions& options) {
  if (q < 2) throw std::invalid_argument("search_code_matrix: need q >= 2");
  if (workers < 1) throw std::invalid_argument("search_code_matrix: need N >= 1");
  if (workers < 64 && q > (std::size_t{1} << workers))
    throw std::invalid_argument("search_code_matrix: q=" + std::to_string(q) + " rows cannot be distinct with N=" +
                                std::to_string(workers) + " workers");
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("search_code_matrix: mu outside [0,1]");

  if (q * workers <= 16) return exhaustive_search(q, workers, mu);
  if (workers <= kMaxExactWorkers) return descent_exact(q, workers, mu, rng, options);
  return descent_proxy(q, workers, mu, rng, options);
}

std::shared_ptr<const Channel> ChannelCache::get(std::size_t q, std::size_t workers, double mu) {
  const Key key{q, workers, std::llround(mu * 1000.0)};
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;

  Rng rng = make_stream(seed_, mix64(q) ^ mix64(workers << 20) ^ mix64(static_cast<std::uint64_t>(std::get<2>(key))));
  auto channel = std::make_shared<Channel>();
  CodeSearchResult found = search_code_matrix(q, workers, mu, rng, options_);
  channel->matrix = std::move(found.matrix);
  channel->mu = mu;
  channel->cost = found.cost;
  if (workers <= kMaxExactWorkers) {
    channel->performance = performance_matrix(channel->matrix, mu);
    channel->cost = channel->performance->average_error();
  }
  entries_.emplace(key, channel);
  return channel;
}

std::vector<double> unanchored_answer_distribution(const CodeMatrix& g) {
  const PerformanceMatrix p = performance_matrix(g, 1.0 / static_cast<double>(g.rows()));
  return {p.row(0).begin(), p.row(0).end()};
}

void write_channel_json(std::ostream& out, const Channel& channel) {
  nlohmann::json doc;
  doc["q"] = channel.matrix.rows();
  doc["N"] = channel.matrix.cols();
  doc["mu"] = channel.mu;
  doc["cost"] = channel.cost;
  doc["matrix"] = channel.matrix.to_rows();
  if (channel.performance) {
    const auto& p = *channel.performance;
    auto rows = nlohmann::json::array();
    for (std::size_t l = 0; l < p.arity(); ++l)
      rows.push_back(std::vector<double>(p.row(l).begin(), p.row(l).end()));
    doc["performance"] = rows;
    doc["p_min"] = p.min_diagonal();
  }
  out << doc.dump(1) << '\n';
}

}  // namespace ursqs
