#pragma once

// Versioned text checkpoint: model parameters plus the full training state.
// Floating-point values are written as hexadecimal literals so a save/load
// cycle is bit-exact.
//
//   hakg-checkpoint 1
//   shape <users> <items> <entities> <relations> <dim>
//   params
//   tensor <name> <rows> <cols>
//   <row values...>            (one line per row)
//   ...
//   state <epoch> <adam_step> <best_metric> <best_epoch> <epochs_since_best>
//   rng <mt19937_64 state>
//   adam_m
//   tensor ...
//   adam_v
//   tensor ...
//   end

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hakg/error.hpp"
#include "hakg/model.hpp"
#include "hakg/training.hpp"

namespace hakg {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  TrainState state;
};

namespace detail {

inline std::string hex(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline void write_tensors(std::ostream& out, const ModelParams& p) {
  p.for_each([&](const char* name, const Table<double>& t) {
    out << "tensor " << name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) out << (c ? " " : "") << hex(t.at(r, c));
      out << '\n';
    }
  });
}

inline void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw CheckpointError("corrupted checkpoint: expected '" + word + "', found '" + got + "'");
  }
}

inline double read_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw CheckpointError("corrupted checkpoint: truncated value");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw CheckpointError("corrupted checkpoint: bad number '" + tok + "'");
  return v;
}

template <class U>
U read_uint(std::istream& in) {
  U v{};
  if (!(in >> v)) throw CheckpointError("corrupted checkpoint: expected an integer");
  return v;
}

inline void read_tensors(std::istream& in, ModelParams& p) {
  p.for_each([&](const char* name, Table<double>& t) {
    expect(in, "tensor");
    expect(in, name);
    const auto rows = read_uint<std::size_t>(in);
    const auto cols = read_uint<std::size_t>(in);
    if (rows != t.rows || cols != t.cols) {
      throw CheckpointError(std::string("checkpoint tensor '") + name + "' has shape " + std::to_string(rows) +
                            "x" + std::to_string(cols) + ", expected " + std::to_string(t.rows) + "x" +
                            std::to_string(t.cols));
    }
    for (auto& x : t.data) x = read_double(in);
  });
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const auto s = ck.params.shape();
  out << "hakg-checkpoint " << kCheckpointVersion << '\n';
  out << "shape " << s.num_users << ' ' << s.num_items << ' ' << s.num_entities << ' ' << s.num_relations << ' '
      << s.dim << '\n';
  out << "params\n";
  detail::write_tensors(out, ck.params);
  out << "state " << ck.state.epoch << ' ' << ck.state.adam.step << ' ' << detail::hex(ck.state.best_metric) << ' '
      << ck.state.best_epoch << ' ' << ck.state.epochs_since_best << '\n';
  out << "rng " << ck.state.rng << '\n';
  out << "adam_m\n";
  detail::write_tensors(out, ck.state.adam.m);
  out << "adam_v\n";
  detail::write_tensors(out, ck.state.adam.v);
  out << "end\n";
}

inline Checkpoint read_checkpoint(std::istream& in) {
  detail::expect(in, "hakg-checkpoint");
  const int version = detail::read_uint<int>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  detail::expect(in, "shape");
  ModelShape s;
  s.num_users = detail::read_uint<std::size_t>(in);
  s.num_items = detail::read_uint<std::size_t>(in);
  s.num_entities = detail::read_uint<std::size_t>(in);
  s.num_relations = detail::read_uint<std::size_t>(in);
  s.dim = detail::read_uint<std::size_t>(in);
  Checkpoint ck{ModelParams(s), TrainState{}};
  ck.state.adam = AdamState(s);
  detail::expect(in, "params");
  detail::read_tensors(in, ck.params);
  detail::expect(in, "state");
  ck.state.epoch = detail::read_uint<std::uint64_t>(in);
  ck.state.adam.step = detail::read_uint<std::uint64_t>(in);
  ck.state.best_metric = detail::read_double(in);
  ck.state.best_epoch = detail::read_uint<std::uint64_t>(in);
  ck.state.epochs_since_best = detail::read_uint<std::uint64_t>(in);
  detail::expect(in, "rng");
  if (!(in >> ck.state.rng)) throw CheckpointError("corrupted checkpoint: bad generator state");
  detail::expect(in, "adam_m");
  detail::read_tensors(in, ck.state.adam.m);
  detail::expect(in, "adam_v");
  detail::read_tensors(in, ck.state.adam.v);
  detail::expect(in, "end");
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path.string());
  write_checkpoint(out, ck);
  if (!out) throw CheckpointError("failed writing " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

/// Throws CheckpointError unless `ck` was trained on a dataset of this shape.
inline void require_compatible(const Checkpoint& ck, const ModelShape& expected) {
  const auto s = ck.params.shape();
  if (!(s == expected)) {
    std::ostringstream msg;
    msg << "checkpoint is incompatible with the dataset: checkpoint shape (users=" << s.num_users
        << ", items=" << s.num_items << ", entities=" << s.num_entities << ", relations=" << s.num_relations
        << ", dim=" << s.dim << ") vs dataset (users=" << expected.num_users << ", items=" << expected.num_items
        << ", entities=" << expected.num_entities << ", relations=" << expected.num_relations
        << ", dim=" << expected.dim << ")";
    throw CheckpointError(msg.str());
  }
}

}  // namespace hakg
