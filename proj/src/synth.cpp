#include "txtopo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "txtopo/error.hpp"
#include "txtopo/market.hpp"
#include "txtopo/rng.hpp"

namespace txtopo {

namespace {

std::string wallet(int id) {
  std::string digits = std::to_string(id);
  return "r" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

std::vector<double> standardize(const std::vector<double>& v) {
  double m = 0.0;
  for (const double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  std::vector<double> out(v.size(), 0.0);
  if (sd > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
  }
  return out;
}

// Splits one arc into 1..3 transfers at random times within the week.
void emit_arc(Rng& rng, std::vector<TransactionRecord>& out, Timestamp week_start, const std::string& from,
              const std::string& to, double amount) {
  const int parts = 1 + static_cast<int>(rng.below(3));
  double shares[3] = {1.0, 0.0, 0.0};
  if (parts > 1) {
    double total = 0.0;
    for (int i = 0; i < parts; ++i) total += (shares[i] = rng.uniform(0.5, 1.5));
    for (int i = 0; i < parts; ++i) shares[i] /= total;
  }
  const auto week_ms = static_cast<std::uint64_t>(std::chrono::milliseconds{kWeek}.count());
  for (int i = 0; i < parts; ++i) {
    const Timestamp ts = week_start + std::chrono::milliseconds{static_cast<long long>(rng.below(week_ms))};
    out.push_back({ts, from, to, amount * shares[i]});
  }
}

}  // namespace

void SyntheticScenario::validate() const {
  if (weeks < 10) throw PreconditionError("synthetic scenario needs at least 10 weeks");
  if (base_components < 6) throw PreconditionError("base_components must be at least 6");
  if (edges_per_week < 200) throw PreconditionError("edges_per_week must be at least 200");
  const int light = (2 * edges_per_week + 4) / 5;
  if (light < 2 * base_components) throw PreconditionError("edges_per_week too small for base_components");
  if (wallet_pool < light + 3 * base_components + 100) {
    throw PreconditionError("wallet_pool too small for the weekly forest");
  }
  if (!(event_rate >= 0.0 && event_rate <= 1.0)) throw PreconditionError("event_rate must lie in [0, 1]");
  if (jump_min < 1 || jump_max < jump_min || jump_max > base_components / 2) {
    throw PreconditionError("jump sizes must satisfy 1 <= jump_min <= jump_max <= base_components / 2");
  }
  if (!(noise >= 0.0)) throw PreconditionError("noise must be non-negative");
  if (issuance_lead_days < 365) throw PreconditionError("issuance_lead_days must be at least 365");
  if (std::chrono::weekday{anchor} != std::chrono::Monday) throw PreconditionError("anchor must be a Monday");
}

SyntheticData synth_generate(const SyntheticScenario& sc) {
  sc.validate();
  const int W = sc.weeks;
  const int E = sc.edges_per_week;
  const int light = (2 * E + 4) / 5;  // ceil(0.4 * E)
  SyntheticData data;
  data.anchor = Timestamp{sc.anchor};

  // Schedules draw from their own streams so that changing one leaves the others fixed.
  Rng schedule(derive_seed(sc.seed, 1));
  auto& truth = data.truth;
  truth.components.resize(W);
  truth.jumps.assign(W, 0);
  truth.motif_triads.resize(W);
  const int max_components = 2 * sc.base_components;
  // Burst arcs must all fit in the top 1% of arcs.
  const int max_triads = std::min(2, static_cast<int>(std::ceil(0.01 * E)) / 4);
  // A fixed number of events at random weeks, so the planted signal strength does not vary by seed.
  std::vector<char> event(static_cast<std::size_t>(W), 0);
  {
    std::vector<int> weeks(static_cast<std::size_t>(W - 1));
    for (int t = 1; t < W; ++t) weeks[t - 1] = t;
    const auto events = static_cast<std::size_t>(std::lround(sc.event_rate * (W - 1)));
    for (std::size_t i = 0; i < events; ++i) {
      std::swap(weeks[i], weeks[i + schedule.below(weeks.size() - i)]);
      event[static_cast<std::size_t>(weeks[i])] = 1;
    }
  }
  for (int t = 0; t < W; ++t) {
    int c = t == 0 ? sc.base_components : truth.components[t - 1];
    if (event[static_cast<std::size_t>(t)]) {
      const int magnitude =
          sc.jump_min + static_cast<int>(schedule.below(static_cast<std::uint64_t>(sc.jump_max - sc.jump_min + 1)));
      // Drift back toward the base level.
      const double p_merge = std::clamp(0.5 + 0.5 * (c - sc.base_components) / double(sc.base_components), 0.1, 0.9);
      int jump = schedule.bernoulli(p_merge) ? -magnitude : magnitude;
      if (c + jump < 2 || c + jump > max_components) jump = -jump;
      truth.jumps[t] = jump;
      c += jump;
    }
    truth.components[t] = c;
    const double u = schedule.uniform();
    truth.motif_triads[t] = std::min(max_triads, u < 0.05 ? 2 : (u < 0.2 ? 1 : 0));
  }

  // Weekly graphs.
  for (int t = 0; t < W; ++t) {
    Rng rng(derive_seed(sc.seed, 1000 + static_cast<std::uint64_t>(t)));
    const Timestamp start = data.anchor + t * kWeek;
    std::vector<int> pool(static_cast<std::size_t>(sc.wallet_pool));
    for (int i = 0; i < sc.wallet_pool; ++i) pool[i] = i;
    // Partial Fisher-Yates for the forest vertices.
    const int forest_vertices = light + truth.components[t];
    for (int i = 0; i < forest_vertices; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(sc.wallet_pool - i)));
      std::swap(pool[i], pool[j]);
    }
    std::set<std::pair<int, int>> used;
    const auto mark = [&](int a, int b) { used.insert({std::min(a, b), std::max(a, b)}); };

    // Forest: vertex k < trees roots tree k, vertex trees + k gives it a first edge (a lone root
    // has no edge and would vanish from the level), the rest attach to random trees.
    const int trees = truth.components[t];
    std::vector<std::vector<int>> members(static_cast<std::size_t>(trees));
    for (int i = 0; i < forest_vertices; ++i) {
      const int k = i < 2 * trees ? i % trees : static_cast<int>(rng.below(static_cast<std::uint64_t>(trees)));
      if (i >= trees) {
        const auto& m = members[k];
        const int parent = m[rng.below(m.size())];
        const int a = pool[i], b = pool[parent];
        mark(a, b);
        if (rng.bernoulli(0.5)) {
          emit_arc(rng, data.transactions, start, wallet(a), wallet(b), rng.uniform(1.0, 2.0));
        } else {
          emit_arc(rng, data.transactions, start, wallet(b), wallet(a), rng.uniform(1.0, 2.0));
        }
      }
      members[k].push_back(i);
    }

    // Motif-2 bursts on dedicated wallets: a<->b, b->c, c->a.
    const int triads = truth.motif_triads[t];
    for (int k = 0; k < triads; ++k) {
      const std::string base = "m" + std::to_string(t) + "_" + std::to_string(k) + "_";
      const std::string a = base + "a", b = base + "b", c = base + "c";
      emit_arc(rng, data.transactions, start, a, b, rng.uniform(2000.0, 5000.0));
      emit_arc(rng, data.transactions, start, b, a, rng.uniform(2000.0, 5000.0));
      emit_arc(rng, data.transactions, start, b, c, rng.uniform(2000.0, 5000.0));
      emit_arc(rng, data.transactions, start, c, a, rng.uniform(2000.0, 5000.0));
    }

    // Heavy single arcs between distinct unordered pairs of the pool.
    const int heavy = E - light - 3 * triads;
    for (int placed = 0; placed < heavy;) {
      const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(sc.wallet_pool)));
      const int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(sc.wallet_pool)));
      if (a == b || used.contains({std::min(a, b), std::max(a, b)})) continue;
      mark(a, b);
      // Log-uniform on [10, 1000).
      emit_arc(rng, data.transactions, start, wallet(a), wallet(b), 10.0 * std::pow(100.0, rng.uniform()));
      ++placed;
    }
  }
  std::stable_sort(data.transactions.begin(), data.transactions.end(),
                   [](const auto& x, const auto& y) { return x.timestamp < y.timestamp; });

  // Market side.
  Rng market(derive_seed(sc.seed, 2));
  data.issuance.kind = SeriesKind::issuance;
  const Date issuance_start = sc.anchor - std::chrono::days{sc.issuance_lead_days};
  const Date issuance_end = week_end_date(data.anchor, W);
  double level = 0.0;
  for (Date d = issuance_start; d <= issuance_end; d += std::chrono::days{1}) {
    level = 0.97 * level + 0.03 * market.normal();
    const double value = std::round(1e6 * std::exp(0.5 * level + 0.05 * market.normal()));
    data.issuance.points.emplace_back(d, value);
  }

  const std::vector<std::string> terms{"democrats", "republicans"};
  std::vector<std::vector<double>> term_values(terms.size(), std::vector<double>(static_cast<std::size_t>(W)));
  for (int t = 0; t < W; ++t) {
    for (auto& tv : term_values) tv[t] = std::round(50.0 + 5.0 * market.normal());
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    TimeSeries series;
    series.kind = SeriesKind::search_frequency;
    for (int t = 0; t < W; ++t) series.points.emplace_back(week_end_date(data.anchor, t), term_values[k][t]);
    data.trends.emplace(terms[k], std::move(series));
  }

  std::vector<double> sent(static_cast<std::size_t>(W), 0.0);
  std::vector<double> puell(static_cast<std::size_t>(W), 0.0);
  for (int t = 0; t < W; ++t) {
    if (t > 0) {
      for (const auto& tv : term_values) sent[t] += tv[t] - tv[t - 1];
    }
    puell[t] = puell_multiple(data.issuance, week_end_date(data.anchor, t));
  }
  const auto z_sent = standardize(sent);
  const auto z_puell = standardize(puell);

  truth.increments.assign(static_cast<std::size_t>(W), 0.0);
  data.price.kind = SeriesKind::price;
  double price = 100.0;
  double current_increment = 0.0;
  data.price.points.emplace_back(week_end_date(data.anchor, 0), price);
  for (int t = 0; t < W; ++t) {
    const int motif_change = t > 0 ? truth.motif_triads[t] - truth.motif_triads[t - 1] : 0;
    // Coupling scales every planted term, so coupling 0 leaves pure noise.
    const double planted = truth.jumps[t] + sc.motif_coupling * motif_change +
                           sc.market_coupling * 0.5 * (z_sent[t] + z_puell[t]) + sc.autoregression * current_increment;
    const double next = sc.coupling * planted + sc.noise * market.normal();
    truth.increments[t] = next;
    price += next;
    data.price.points.emplace_back(week_end_date(data.anchor, t + 1), price);
    current_increment = next;
  }
  return data;
}

SyntheticData truncate_after_week(const SyntheticData& data, int week) {
  const Timestamp cut = data.anchor + (week + 1) * kWeek;
  const Date last_day = week_end_date(data.anchor, week);
  const auto clip = [&](const TimeSeries& s) {
    TimeSeries out{s.kind, {}};
    for (const auto& p : s.points) {
      if (p.first <= last_day) out.points.push_back(p);
    }
    return out;
  };
  SyntheticData out;
  out.anchor = data.anchor;
  for (const auto& r : data.transactions) {
    if (r.timestamp < cut) out.transactions.push_back(r);
  }
  out.price = clip(data.price);
  out.issuance = clip(data.issuance);
  for (const auto& [term, series] : data.trends) out.trends.emplace(term, clip(series));
  // Planted quantities are not observable data; they are dropped.
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("transactions.csv");
    write_transactions(out, data.transactions);
  }
  {
    auto out = open("price.csv");
    write_price_csv(out, data.price);
  }
  {
    auto out = open("issuance.csv");
    write_issuance_csv(out, data.issuance);
  }
  {
    auto out = open("trends.csv");
    write_trends_csv(out, data.trends);
  }
}

}  // namespace txtopo
