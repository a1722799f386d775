#include "relfl/enumeration.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace relfl {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_pow(int q, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (__builtin_mul_overflow(r, static_cast<std::uint64_t>(q), &r)) return kSaturated;
  }
  return r;
}

std::int64_t checked_pow(int q, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (__builtin_mul_overflow(r, static_cast<std::int64_t>(q), &r)) throw Error("coset count overflows int64");
  }
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error("integral value overflows int64");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error("integral value overflows int64");
  return r;
}

LocalElement partial_parameter(const ResidueField& f, int u_floor, const std::vector<int>& digits) {
  const int p = u_floor + static_cast<int>(digits.size());
  if (digits.empty()) return LocalElement::zero_mod(f, p);
  std::vector<ResidueElement> coeffs(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) coeffs[i] = {digits[i], 0};
  return LocalElement::from_coefficients(f, u_floor, coeffs, p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Windows and representatives

void EnumWindow::validate() const {
  if (k_min > k_max) throw InvalidParams("window needs k_min <= k_max, got " + to_string());
}

std::uint64_t EnumWindow::shell_count(int k, int q) const { return saturating_pow(q, u_digits(k)); }

std::uint64_t EnumWindow::count(int q) const {
  std::uint64_t total = 0;
  for (int k = k_min; k <= k_max; ++k) {
    if (__builtin_add_overflow(total, shell_count(k, q), &total)) return kSaturated;
  }
  return total;
}

std::string EnumWindow::to_string() const {
  std::ostringstream out;
  out << "{k_min=" << k_min << ", k_max=" << k_max << ", u_floor=" << u_floor << "}";
  return out.str();
}

std::string to_string(Orientation o) { return o == Orientation::right_translate ? "right_translate" : "conjugate"; }

Matrix2 coset_matrix(const BorelCoset& c, Orientation o, const FieldConfig& cfg) {
  const Matrix2 n = unipotent(c.u, cfg);
  const Matrix2 d = torus_element(LocalElement::uniformizer_power(cfg, c.k));
  return o == Orientation::right_translate ? n * d : d.inverse() * n;
}

Matrix2 transform_by_coset(const Matrix2& x, int k, const LocalElement& u, Orientation o) {
  if (o == Orientation::right_translate) {
    // X n(u) = [[x, xu + y], [z, zu + w]]; then columns scale by w^k and w^-k.
    return {x(0, 0).shifted(k), (x(0, 0) * u + x(0, 1)).shifted(-k), x(1, 0).shifted(k),
            (x(1, 0) * u + x(1, 1)).shifted(-k)};
  }
  // n(u) X n(-u) = [[x + uz, y + u(w - x) - u^2 z], [z, w - uz]]; then d(w^-k) . d(w^k).
  const LocalElement uz = u * x(1, 0);
  const LocalElement top_right = x(0, 1) + u * (x(1, 1) - x(0, 0)) - u * uz;
  return {x(0, 0) + uz, top_right.shifted(-2 * k), x(1, 0).shifted(2 * k), x(1, 1) - uz};
}

LocalElement coset_parameter(const FieldConfig& cfg, int k, int u_floor, const std::vector<int>& digits) {
  bool any = false;
  for (int d : digits) any = any || d != 0;
  if (!any) return LocalElement::zero(cfg.field());
  std::vector<ResidueElement> coeffs(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) coeffs[i] = {digits[i], 0};
  return LocalElement::from_coefficients(cfg.field(), u_floor, coeffs, 2 * k + cfg.precision());
}

CosetEnumerator::CosetEnumerator(const FieldConfig& cfg, EnumWindow w, Orientation o, std::uint64_t cap)
    : cfg_(cfg), w_(w), o_(o), k_(w.k_min) {
  w_.validate();
  const std::uint64_t n = w_.count(cfg.q());
  if (n > cap) {
    throw WindowTooLarge("window " + w_.to_string() + " has " + (n == kSaturated ? std::string("> 2^64") : std::to_string(n)) +
                         " representatives, cap " + std::to_string(cap));
  }
}

void CosetEnumerator::start_shell() {
  digits_.assign(static_cast<std::size_t>(w_.u_digits(k_)), 0);
  shell_started_ = true;
}

bool CosetEnumerator::next(BorelCoset& coset, Matrix2& matrix) {
  while (k_ <= w_.k_max) {
    if (!shell_started_) {
      start_shell();
    } else {
      // Odometer on the digit tuple, last position fastest.
      int pos = static_cast<int>(digits_.size()) - 1;
      while (pos >= 0 && digits_[static_cast<std::size_t>(pos)] == cfg_.q() - 1) {
        digits_[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) {
        ++k_;
        shell_started_ = false;
        continue;
      }
      ++digits_[static_cast<std::size_t>(pos)];
    }
    coset = {k_, coset_parameter(cfg_, k_, w_.u_floor, digits_)};
    matrix = coset_matrix(coset, o_, cfg_);
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Counting

namespace {

struct Task {
  int k;
  std::vector<int> prefix;
};

class Counter {
 public:
  Counter(const Matrix2& target, Orientation o, const EnumWindow& w, const CosetIntegrand& f, const FieldConfig& cfg,
          const CountOptions& opts)
      : target_(target), o_(o), w_(w), f_(f), cfg_(cfg), opts_(opts) {}

  CountStats run(const std::vector<Task>& tasks) {
    std::vector<CountStats> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          results[i] = run_task(tasks[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(tasks.size());
          return;
        }
      }
    };
    const int jobs = std::max(1, std::min<int>(opts_.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    CountStats total;
    for (const auto& r : results) {
      total.value = checked_add(total.value, r.value);
      total.support = checked_add(total.support, r.support);
      total.nodes += r.nodes;
    }
    return total;
  }

 private:
  void visit() {
    if (nodes_.fetch_add(1) + 1 > opts_.node_cap) {
      throw WindowTooLarge("node cap " + std::to_string(opts_.node_cap) + " exceeded on window " + w_.to_string() +
                           "; lower the parameters or raise the cap");
    }
  }

  CountStats run_task(const Task& t) {
    CountStats s;
    std::vector<int> digits = t.prefix;
    dfs(t.k, digits, s);
    return s;
  }

  void dfs(int k, std::vector<int>& digits, CountStats& s) {
    visit();
    ++s.nodes;
    const int total_digits = w_.u_digits(k);
    const int fixed = static_cast<int>(digits.size());
    if (fixed >= total_digits) {
      const LocalElement u = coset_parameter(cfg_, k, w_.u_floor, digits);
      const Matrix2 m = transform_by_coset(target_, k, u, o_);
      const Verdict v = f_({k, u, true, m});
      if (v.kind == Verdict::Kind::undecided) {
        throw InsufficientPrecision("integrand undecided on coset k=" + std::to_string(k) + ", u=" + u.to_string());
      }
      if (v.value < 0) throw Error("integrand returned a negative value");
      s.value = checked_add(s.value, v.value);
      if (v.value != 0) s.support = checked_add(s.support, 1);
      return;
    }
    if (opts_.prune) {
      const LocalElement u = partial_parameter(cfg_.field(), w_.u_floor, digits);
      const Matrix2 m = transform_by_coset(target_, k, u, o_);
      const Verdict v = f_({k, u, false, m});
      if (v.kind == Verdict::Kind::zero) return;
      if (v.kind == Verdict::Kind::constant) {
        if (v.value < 0) throw Error("integrand returned a negative value");
        const std::int64_t n = checked_pow(cfg_.q(), total_digits - fixed);
        s.value = checked_add(s.value, checked_mul(v.value, n));
        s.support = checked_add(s.support, n);
        return;
      }
    }
    digits.push_back(0);
    for (int c = 0; c < cfg_.q(); ++c) {
      digits.back() = c;
      dfs(k, digits, s);
    }
    digits.pop_back();
  }

  const Matrix2& target_;
  Orientation o_;
  const EnumWindow& w_;
  const CosetIntegrand& f_;
  const FieldConfig& cfg_;
  const CountOptions& opts_;
  std::atomic<std::uint64_t> nodes_{0};
};

void append_tasks(std::vector<Task>& tasks, const EnumWindow& w, int k, bool floor_only, int depth_opt, int q) {
  const int total = w.u_digits(k);
  if (floor_only && total == 0) return;
  int depth = std::min(std::max(depth_opt, 0), total);
  if (floor_only) depth = std::max(depth, 1);
  std::vector<int> prefix(static_cast<std::size_t>(depth), 0);
  if (floor_only) prefix[0] = 1;
  while (true) {
    tasks.push_back({k, prefix});
    int pos = depth - 1;
    while (pos >= 0 && prefix[static_cast<std::size_t>(pos)] == q - 1) {
      prefix[static_cast<std::size_t>(pos)] = (floor_only && pos == 0) ? 1 : 0;
      --pos;
    }
    if (pos < 0) return;
    ++prefix[static_cast<std::size_t>(pos)];
  }
}

}  // namespace

CountStats count_window(const Matrix2& target, Orientation o, const EnumWindow& w, const CosetIntegrand& f,
                        const FieldConfig& cfg, const CountOptions& opts) {
  w.validate();
  std::vector<Task> tasks;
  for (int k = w.k_min; k <= w.k_max; ++k) append_tasks(tasks, w, k, false, opts.partition_depth, cfg.q());
  return Counter(target, o, w, f, cfg, opts).run(tasks);
}

CountStats count_shell(const Matrix2& target, Orientation o, const EnumWindow& w, int k, bool floor_only,
                       const CosetIntegrand& f, const FieldConfig& cfg, const CountOptions& opts) {
  w.validate();
  std::vector<Task> tasks;
  append_tasks(tasks, w, k, floor_only, opts.partition_depth, cfg.q());
  return Counter(target, o, w, f, cfg, opts).run(tasks);
}

bool boundary_vanishing(const Matrix2& target, Orientation o, const EnumWindow& w, const CosetIntegrand& f,
                        const FieldConfig& cfg, const CountOptions& opts) {
  w.validate();
  for (int k = w.k_min; k <= w.k_max; ++k) {
    if (w.u_digits(k) == 0) return false;
  }
  if (count_shell(target, o, w, w.k_min, false, f, cfg, opts).support != 0) return false;
  if (count_shell(target, o, w, w.k_max, false, f, cfg, opts).support != 0) return false;
  for (int k = w.k_min + 1; k < w.k_max; ++k) {
    if (count_shell(target, o, w, k, true, f, cfg, opts).support != 0) return false;
  }
  return true;
}

}  // namespace relfl
