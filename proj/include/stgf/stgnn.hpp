#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stgf/graph.hpp"
#include "stgf/panel.hpp"
#include "stgf/rng.hpp"

namespace stgf {

enum class Task { Regression, Classification };
enum class CellKind { Gcrn, Gclstm };
enum class Optimizer { Adam, Sgd };
enum class Precision { Float32, Float64 };

inline const char* to_string(Task t) {
  return t == Task::Regression ? "regression" : "classification";
}
inline const char* to_string(CellKind c) { return c == CellKind::Gcrn ? "gcrn" : "gclstm"; }
inline const char* to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }
inline const char* to_string(Precision p) { return p == Precision::Float32 ? "f32" : "f64"; }

Task parse_task(const std::string& name);
CellKind parse_cell(const std::string& name);
Optimizer parse_optimizer(const std::string& name);
Precision parse_precision(const std::string& name);

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using SparseMat = Eigen::SparseMatrix<Scalar>;

template <typename Scalar>
struct GraphConvWeights {
  Mat<Scalar> weight;  // in x out
  Row<Scalar> bias;    // broadcast over nodes
};

/// GRU-style cell parameters: update gate (z), reset gate (r) and candidate
/// state (h), each fed by an input branch and a hidden branch.
template <typename Scalar>
struct GcrnParameters {
  GraphConvWeights<Scalar> xz, hz;
  GraphConvWeights<Scalar> xr, hr;
  GraphConvWeights<Scalar> xh, hh;
};

/// LSTM-style cell parameters: input (i), forget (f), cell (c) and output (o)
/// gates with input and hidden branches, elementwise peephole vectors on the
/// cell state, and one extra bias per gate.
template <typename Scalar>
struct GclstmParameters {
  GraphConvWeights<Scalar> xi, hi;
  GraphConvWeights<Scalar> xf, hf;
  GraphConvWeights<Scalar> xc, hc;
  GraphConvWeights<Scalar> xo, ho;
  Row<Scalar> w_ci, w_cf, w_co;
  Row<Scalar> b_i, b_f, b_c, b_o;
};

/// Per-node linear readout of the final hidden state: hidden -> horizon for
/// regression, hidden -> 2 for classification (before the log-softmax).
template <typename Scalar>
struct HeadParameters {
  Mat<Scalar> weight;
  Row<Scalar> bias;
};

template <typename Scalar>
struct Model {
  CellKind cell = CellKind::Gcrn;
  Task task = Task::Regression;
  Eigen::Index input_dim = 1;
  Eigen::Index hidden = 32;
  Eigen::Index horizon = 1;
  GcrnParameters<Scalar> gcrn;      // populated when cell == Gcrn
  GclstmParameters<Scalar> gclstm;  // populated when cell == Gclstm
  HeadParameters<Scalar> head;
};

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  std::uint64_t seed = 1;
  Task task = Task::Regression;
  Eigen::Index hidden = 32;
  Optimizer optimizer = Optimizer::Adam;
  Precision precision = Precision::Float64;
};

/// Flat named view over one parameter block; the ordering of the views is the
/// fixed serialization and optimizer-state order.
template <typename T>
struct ParamView {
  std::string name;
  T* data;
  Eigen::Index size;
};

namespace detail {

template <typename ModelT, typename AddFn>
void visit_params(ModelT& m, AddFn&& add) {
  auto conv = [&](const char* base, auto& gc) {
    add(std::string(base) + ".weight", gc.weight);
    add(std::string(base) + ".bias", gc.bias);
  };
  if (m.cell == CellKind::Gcrn) {
    conv("gcrn.xz", m.gcrn.xz);
    conv("gcrn.hz", m.gcrn.hz);
    conv("gcrn.xr", m.gcrn.xr);
    conv("gcrn.hr", m.gcrn.hr);
    conv("gcrn.xh", m.gcrn.xh);
    conv("gcrn.hh", m.gcrn.hh);
  } else {
    conv("gclstm.xi", m.gclstm.xi);
    conv("gclstm.hi", m.gclstm.hi);
    conv("gclstm.xf", m.gclstm.xf);
    conv("gclstm.hf", m.gclstm.hf);
    conv("gclstm.xc", m.gclstm.xc);
    conv("gclstm.hc", m.gclstm.hc);
    conv("gclstm.xo", m.gclstm.xo);
    conv("gclstm.ho", m.gclstm.ho);
    add("gclstm.peephole_i", m.gclstm.w_ci);
    add("gclstm.peephole_f", m.gclstm.w_cf);
    add("gclstm.peephole_o", m.gclstm.w_co);
    add("gclstm.gate_bias_i", m.gclstm.b_i);
    add("gclstm.gate_bias_f", m.gclstm.b_f);
    add("gclstm.gate_bias_c", m.gclstm.b_c);
    add("gclstm.gate_bias_o", m.gclstm.b_o);
  }
  add("head.weight", m.head.weight);
  add("head.bias", m.head.bias);
}

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

template <typename Scalar>
std::vector<ParamView<Scalar>> param_views(Model<Scalar>& m) {
  std::vector<ParamView<Scalar>> out;
  detail::visit_params(m, [&](std::string name, auto& block) {
    out.push_back({std::move(name), block.data(), block.size()});
  });
  return out;
}

template <typename Scalar>
std::vector<ParamView<const Scalar>> param_views(const Model<Scalar>& m) {
  std::vector<ParamView<const Scalar>> out;
  detail::visit_params(m, [&](std::string name, const auto& block) {
    out.push_back({std::move(name), block.data(), block.size()});
  });
  return out;
}

template <typename Scalar>
Model<Scalar> zeros_like(const Model<Scalar>& m) {
  Model<Scalar> z = m;
  for (auto& view : param_views(z)) {
    std::fill(view.data, view.data + view.size, Scalar(0));
  }
  return z;
}

/// Glorot-uniform weights, zero biases and peepholes. The draw order is the
/// param_views order restricted to weight matrices, filled in storage order,
/// so a seed pins every parameter bit-exactly.
template <typename Scalar>
Model<Scalar> make_model(CellKind cell, Task task, Eigen::Index input_dim, Eigen::Index hidden,
                         Eigen::Index horizon, std::uint64_t seed) {
  detail::require(input_dim >= 1 && hidden >= 1 && horizon >= 1,
                  "model dimensions must be at least 1");
  Model<Scalar> m;
  m.cell = cell;
  m.task = task;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.horizon = horizon;

  Rng rng(seed);
  auto glorot = [&](Eigen::Index in, Eigen::Index out) {
    Mat<Scalar> w(in, out);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      w.data()[k] = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
    return w;
  };
  auto conv = [&](Eigen::Index in, Eigen::Index out) {
    GraphConvWeights<Scalar> g;
    g.weight = glorot(in, out);
    g.bias = Row<Scalar>::Zero(out);
    return g;
  };

  if (cell == CellKind::Gcrn) {
    m.gcrn.xz = conv(input_dim, hidden);
    m.gcrn.hz = conv(hidden, hidden);
    m.gcrn.xr = conv(input_dim, hidden);
    m.gcrn.hr = conv(hidden, hidden);
    m.gcrn.xh = conv(input_dim, hidden);
    m.gcrn.hh = conv(hidden, hidden);
  } else {
    m.gclstm.xi = conv(input_dim, hidden);
    m.gclstm.hi = conv(hidden, hidden);
    m.gclstm.xf = conv(input_dim, hidden);
    m.gclstm.hf = conv(hidden, hidden);
    m.gclstm.xc = conv(input_dim, hidden);
    m.gclstm.hc = conv(hidden, hidden);
    m.gclstm.xo = conv(input_dim, hidden);
    m.gclstm.ho = conv(hidden, hidden);
    m.gclstm.w_ci = Row<Scalar>::Zero(hidden);
    m.gclstm.w_cf = Row<Scalar>::Zero(hidden);
    m.gclstm.w_co = Row<Scalar>::Zero(hidden);
    m.gclstm.b_i = Row<Scalar>::Zero(hidden);
    m.gclstm.b_f = Row<Scalar>::Zero(hidden);
    m.gclstm.b_c = Row<Scalar>::Zero(hidden);
    m.gclstm.b_o = Row<Scalar>::Zero(hidden);
  }
  const Eigen::Index head_out = task == Task::Classification ? 2 : horizon;
  m.head.weight = glorot(hidden, head_out);
  m.head.bias = Row<Scalar>::Zero(head_out);
  return m;
}

template <typename Scalar>
SparseMat<Scalar> cast_propagation(const PropagationMatrix& p) {
  return p.values.cast<Scalar>();
}

template <typename Scalar>
Mat<Scalar> sigmoid(const Mat<Scalar>& x) {
  return (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
}

template <typename Scalar>
Mat<Scalar> log_softmax_rows(const Mat<Scalar>& logits) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> m = logits.array().rowwise().maxCoeff();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> lse =
      (logits.array().colwise() - m).exp().rowwise().sum().log() + m;
  return (logits.array().colwise() - lse).matrix();
}

template <typename Scalar>
Mat<Scalar> graph_conv(const Mat<Scalar>& x, const GraphConvWeights<Scalar>& w,
                       const SparseMat<Scalar>& prop) {
  detail::require(prop.rows() == x.rows(), "propagation matrix and input disagree on node count");
  detail::require(x.cols() == w.weight.rows(), "input feature width does not match weights");
  Mat<Scalar> out = (prop * x) * w.weight;
  out.rowwise() += w.bias;
  return out;
}

template <typename Scalar>
struct GcrnStepTrace {
  Mat<Scalar> px, ph, prh;
  Mat<Scalar> z, r, htil;
};

template <typename Scalar>
struct GclstmStepTrace {
  Mat<Scalar> px, ph;
  Mat<Scalar> i, f, g, o;
  Mat<Scalar> c_next, tanh_c;
};

namespace detail {

template <typename Scalar>
void check_step_shapes(const Mat<Scalar>& x, const Mat<Scalar>& h, const SparseMat<Scalar>& prop,
                       Eigen::Index input_dim, Eigen::Index hidden) {
  require(x.rows() == h.rows() && x.rows() == prop.rows(),
          "node counts of input, state and propagation matrix disagree");
  require(x.cols() == input_dim, "input width does not match cell parameters");
  require(h.cols() == hidden, "hidden state width does not match cell parameters");
}

template <typename Scalar>
Mat<Scalar> gcrn_step_core(const GcrnParameters<Scalar>& p, const Mat<Scalar>& x,
                           const Mat<Scalar>& h_prev, const SparseMat<Scalar>& prop,
                           GcrnStepTrace<Scalar>* trace) {
  check_step_shapes(x, h_prev, prop, p.xz.weight.rows(), p.hz.weight.rows());
  Mat<Scalar> px = prop * x;
  Mat<Scalar> ph = prop * h_prev;

  Mat<Scalar> az = px * p.xz.weight + ph * p.hz.weight;
  az.rowwise() += p.xz.bias + p.hz.bias;
  Mat<Scalar> z = sigmoid(az);

  Mat<Scalar> ar = px * p.xr.weight + ph * p.hr.weight;
  ar.rowwise() += p.xr.bias + p.hr.bias;
  Mat<Scalar> r = sigmoid(ar);

  Mat<Scalar> prh = prop * r.cwiseProduct(h_prev);
  Mat<Scalar> ah = px * p.xh.weight + prh * p.hh.weight;
  ah.rowwise() += p.xh.bias + p.hh.bias;
  Mat<Scalar> htil = ah.array().tanh().matrix();

  Mat<Scalar> h_next =
      (z.array() * h_prev.array() + (Scalar(1) - z.array()) * htil.array()).matrix();
  if (trace) {
    trace->px = std::move(px);
    trace->ph = std::move(ph);
    trace->prh = std::move(prh);
    trace->z = std::move(z);
    trace->r = std::move(r);
    trace->htil = std::move(htil);
  }
  return h_next;
}

template <typename Scalar>
std::pair<Mat<Scalar>, Mat<Scalar>> gclstm_step_core(const GclstmParameters<Scalar>& p,
                                                     const Mat<Scalar>& x, const Mat<Scalar>& h_prev,
                                                     const Mat<Scalar>& c_prev,
                                                     const SparseMat<Scalar>& prop,
                                                     GclstmStepTrace<Scalar>* trace) {
  check_step_shapes(x, h_prev, prop, p.xi.weight.rows(), p.hi.weight.rows());
  require(c_prev.rows() == h_prev.rows() && c_prev.cols() == h_prev.cols(),
          "cell state shape does not match hidden state");
  Mat<Scalar> px = prop * x;
  Mat<Scalar> ph = prop * h_prev;

  Mat<Scalar> ai = px * p.xi.weight + ph * p.hi.weight;
  ai.rowwise() += p.xi.bias + p.hi.bias + p.b_i;
  ai.array() += c_prev.array().rowwise() * p.w_ci.array();
  Mat<Scalar> i = sigmoid(ai);

  Mat<Scalar> af = px * p.xf.weight + ph * p.hf.weight;
  af.rowwise() += p.xf.bias + p.hf.bias + p.b_f;
  af.array() += c_prev.array().rowwise() * p.w_cf.array();
  Mat<Scalar> f = sigmoid(af);

  Mat<Scalar> ac = px * p.xc.weight + ph * p.hc.weight;
  ac.rowwise() += p.xc.bias + p.hc.bias + p.b_c;
  Mat<Scalar> g = ac.array().tanh().matrix();

  Mat<Scalar> c_next = (f.array() * c_prev.array() + i.array() * g.array()).matrix();

  Mat<Scalar> ao = px * p.xo.weight + ph * p.ho.weight;
  ao.rowwise() += p.xo.bias + p.ho.bias + p.b_o;
  ao.array() += c_next.array().rowwise() * p.w_co.array();
  Mat<Scalar> o = sigmoid(ao);

  Mat<Scalar> tanh_c = c_next.array().tanh().matrix();
  Mat<Scalar> h_next = o.cwiseProduct(tanh_c);
  if (trace) {
    trace->px = std::move(px);
    trace->ph = std::move(ph);
    trace->i = std::move(i);
    trace->f = std::move(f);
    trace->g = std::move(g);
    trace->o = std::move(o);
    trace->c_next = c_next;
    trace->tanh_c = std::move(tanh_c);
  }
  return {std::move(h_next), std::move(c_next)};
}

template <typename Scalar>
Mat<Scalar> apply_head(const Model<Scalar>& m, const Mat<Scalar>& h_final) {
  Mat<Scalar> out = h_final * m.head.weight;
  out.rowwise() += m.head.bias;
  if (m.task == Task::Classification) out = log_softmax_rows(out);
  return out;
}

}  // namespace detail

template <typename Scalar>
Mat<Scalar> gcrn_step(const GcrnParameters<Scalar>& p, const Mat<Scalar>& x,
                      const Mat<Scalar>& h_prev, const SparseMat<Scalar>& prop) {
  return detail::gcrn_step_core<Scalar>(p, x, h_prev, prop, nullptr);
}

template <typename Scalar>
std::pair<Mat<Scalar>, Mat<Scalar>> gclstm_step(const GclstmParameters<Scalar>& p,
                                                const Mat<Scalar>& x, const Mat<Scalar>& h_prev,
                                                const Mat<Scalar>& c_prev,
                                                const SparseMat<Scalar>& prop) {
  return detail::gclstm_step_core<Scalar>(p, x, h_prev, c_prev, prop, nullptr);
}

/// All intermediate states of one window pass, enough to run the exact
/// reverse sweep without recomputation.
template <typename Scalar>
struct ForwardTrace {
  std::vector<GcrnStepTrace<Scalar>> gcrn_steps;
  std::vector<GclstmStepTrace<Scalar>> gclstm_steps;
  std::vector<Mat<Scalar>> hidden;  // h_0 (zeros) .. h_l
  std::vector<Mat<Scalar>> cell;    // c_0 (zeros) .. c_l, gclstm only
  Mat<Scalar> prediction;
};

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const Model<Scalar>& m, const Mat<Scalar>& window,
                                   const SparseMat<Scalar>& prop) {
  detail::require(m.input_dim == 1, "window forward expects scalar node features");
  detail::require(window.cols() >= 1, "window must cover at least one day");
  const Eigen::Index n = window.rows();
  const Eigen::Index steps = window.cols();

  ForwardTrace<Scalar> tr;
  tr.hidden.reserve(static_cast<std::size_t>(steps) + 1);
  tr.hidden.push_back(Mat<Scalar>::Zero(n, m.hidden));
  if (m.cell == CellKind::Gcrn) {
    tr.gcrn_steps.resize(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
      tr.hidden.push_back(detail::gcrn_step_core(m.gcrn, Mat<Scalar>(window.col(t)),
                                                 tr.hidden.back(), prop,
                                                 &tr.gcrn_steps[static_cast<std::size_t>(t)]));
    }
  } else {
    tr.gclstm_steps.resize(static_cast<std::size_t>(steps));
    tr.cell.reserve(static_cast<std::size_t>(steps) + 1);
    tr.cell.push_back(Mat<Scalar>::Zero(n, m.hidden));
    for (Eigen::Index t = 0; t < steps; ++t) {
      auto [h, c] = detail::gclstm_step_core(m.gclstm, Mat<Scalar>(window.col(t)),
                                             tr.hidden.back(), tr.cell.back(), prop,
                                             &tr.gclstm_steps[static_cast<std::size_t>(t)]);
      tr.hidden.push_back(std::move(h));
      tr.cell.push_back(std::move(c));
    }
  }
  tr.prediction = detail::apply_head(m, tr.hidden.back());
  return tr;
}

/// Prediction for one standardized window: N x horizon values for regression,
/// N x 2 log-probabilities for classification.
template <typename Scalar>
Mat<Scalar> forward(const Model<Scalar>& m, const Mat<Scalar>& window,
                    const SparseMat<Scalar>& prop) {
  detail::require(m.input_dim == 1, "window forward expects scalar node features");
  detail::require(window.cols() >= 1, "window must cover at least one day");
  const Eigen::Index n = window.rows();
  Mat<Scalar> h = Mat<Scalar>::Zero(n, m.hidden);
  if (m.cell == CellKind::Gcrn) {
    for (Eigen::Index t = 0; t < window.cols(); ++t) {
      h = detail::gcrn_step_core<Scalar>(m.gcrn, Mat<Scalar>(window.col(t)), h, prop, nullptr);
    }
  } else {
    Mat<Scalar> c = Mat<Scalar>::Zero(n, m.hidden);
    for (Eigen::Index t = 0; t < window.cols(); ++t) {
      auto [hn, cn] = detail::gclstm_step_core<Scalar>(m.gclstm, Mat<Scalar>(window.col(t)), h, c,
                                                       prop, nullptr);
      h = std::move(hn);
      c = std::move(cn);
    }
  }
  return detail::apply_head(m, h);
}

/// Mean squared error over every entry.
template <typename Scalar>
double loss(const Mat<Scalar>& prediction, const Mat<Scalar>& target) {
  detail::require(prediction.rows() == target.rows() && prediction.cols() == target.cols(),
                  "prediction and target shapes differ");
  detail::require(prediction.size() > 0, "cannot score empty matrices");
  return static_cast<double>((prediction - target).squaredNorm()) /
         static_cast<double>(prediction.size());
}

/// Mean negative log-likelihood of the true class under row log-probabilities.
template <typename Scalar>
double loss(const Mat<Scalar>& log_probs, const Eigen::VectorXi& labels) {
  detail::require(log_probs.rows() == labels.size(), "log-probability rows and labels differ");
  detail::require(log_probs.cols() == 2, "classification expects two columns of log-probabilities");
  double total = 0.0;
  for (Eigen::Index r = 0; r < labels.size(); ++r) {
    const int y = labels[r];
    detail::require(y == 0 || y == 1, "labels must be 0 (Stable) or 1 (Alert)");
    total -= static_cast<double>(log_probs(r, y));
  }
  return total / static_cast<double>(labels.size());
}

/// Supervised examples in model precision: standardized windows plus either
/// standardized horizon targets (regression) or final-day labels
/// (classification).
template <typename Scalar>
struct SnapshotBatch {
  std::vector<Mat<Scalar>> windows;
  std::vector<Mat<Scalar>> targets;
  std::vector<Eigen::VectorXi> labels;

  std::size_t size() const { return windows.size(); }
};

template <typename Scalar>
SnapshotBatch<Scalar> make_batch(const PanelSeries& standardized,
                                 const std::vector<Snapshot>& snapshots, Task task,
                                 const Eigen::MatrixXi* labels = nullptr) {
  if (task == Task::Classification && labels == nullptr) {
    throw std::invalid_argument("classification batch requires a label matrix");
  }
  SnapshotBatch<Scalar> batch;
  batch.windows.reserve(snapshots.size());
  for (const Snapshot& snap : snapshots) {
    batch.windows.push_back(window_of(standardized, snap).cast<Scalar>());
    if (task == Task::Regression) {
      batch.targets.push_back(target_of(standardized, snap).cast<Scalar>());
    } else {
      batch.labels.push_back(label_target_of(*labels, snap));
    }
  }
  return batch;
}

template <typename Scalar>
struct BatchGradients {
  Model<Scalar> grads;
  double loss = 0.0;
};

namespace detail {

template <typename Scalar>
Row<Scalar> colsum(const Mat<Scalar>& m) {
  return m.colwise().sum();
}

template <typename Scalar>
void gcrn_backward(const Model<Scalar>& m, const ForwardTrace<Scalar>& tr,
                   const SparseMat<Scalar>& prop_t, Mat<Scalar> dh, GcrnParameters<Scalar>& g) {
  const auto steps = static_cast<Eigen::Index>(tr.gcrn_steps.size());
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto& st = tr.gcrn_steps[static_cast<std::size_t>(t)];
    const Mat<Scalar>& h_prev = tr.hidden[static_cast<std::size_t>(t)];

    Mat<Scalar> dz = dh.cwiseProduct(h_prev - st.htil);
    Mat<Scalar> dah =
        (dh.array() * (Scalar(1) - st.z.array()) * (Scalar(1) - st.htil.array().square()))
            .matrix();
    Mat<Scalar> dh_acc = dh.cwiseProduct(st.z);

    g.xh.weight.noalias() += st.px.transpose() * dah;
    g.xh.bias += colsum(dah);
    g.hh.weight.noalias() += st.prh.transpose() * dah;
    g.hh.bias += colsum(dah);

    Mat<Scalar> drh = prop_t * (dah * m.gcrn.hh.weight.transpose());
    Mat<Scalar> dr = drh.cwiseProduct(h_prev);
    dh_acc += drh.cwiseProduct(st.r);

    Mat<Scalar> daz = (dz.array() * st.z.array() * (Scalar(1) - st.z.array())).matrix();
    Mat<Scalar> dar = (dr.array() * st.r.array() * (Scalar(1) - st.r.array())).matrix();

    g.xz.weight.noalias() += st.px.transpose() * daz;
    g.xz.bias += colsum(daz);
    g.hz.weight.noalias() += st.ph.transpose() * daz;
    g.hz.bias += colsum(daz);
    g.xr.weight.noalias() += st.px.transpose() * dar;
    g.xr.bias += colsum(dar);
    g.hr.weight.noalias() += st.ph.transpose() * dar;
    g.hr.bias += colsum(dar);

    Mat<Scalar> dph =
        daz * m.gcrn.hz.weight.transpose() + dar * m.gcrn.hr.weight.transpose();
    dh_acc.noalias() += prop_t * dph;
    dh = std::move(dh_acc);
  }
}

template <typename Scalar>
void gclstm_backward(const Model<Scalar>& m, const ForwardTrace<Scalar>& tr,
                     const SparseMat<Scalar>& prop_t, Mat<Scalar> dh,
                     GclstmParameters<Scalar>& g) {
  const auto steps = static_cast<Eigen::Index>(tr.gclstm_steps.size());
  const auto& p = m.gclstm;
  Mat<Scalar> dc = Mat<Scalar>::Zero(dh.rows(), dh.cols());
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto& st = tr.gclstm_steps[static_cast<std::size_t>(t)];
    const Mat<Scalar>& c_prev = tr.cell[static_cast<std::size_t>(t)];

    Mat<Scalar> dao =
        (dh.array() * st.tanh_c.array() * st.o.array() * (Scalar(1) - st.o.array())).matrix();
    Mat<Scalar> dct =
        dc + (dh.array() * st.o.array() * (Scalar(1) - st.tanh_c.array().square())).matrix();
    dct.array() += dao.array().rowwise() * p.w_co.array();
    g.w_co += colsum<Scalar>(dao.cwiseProduct(st.c_next));

    Mat<Scalar> dai =
        (dct.array() * st.g.array() * st.i.array() * (Scalar(1) - st.i.array())).matrix();
    Mat<Scalar> daf =
        (dct.array() * c_prev.array() * st.f.array() * (Scalar(1) - st.f.array())).matrix();
    Mat<Scalar> dag =
        (dct.array() * st.i.array() * (Scalar(1) - st.g.array().square())).matrix();
    Mat<Scalar> dc_prev = dct.cwiseProduct(st.f);
    dc_prev.array() += dai.array().rowwise() * p.w_ci.array();
    dc_prev.array() += daf.array().rowwise() * p.w_cf.array();

    g.w_ci += colsum<Scalar>(dai.cwiseProduct(c_prev));
    g.w_cf += colsum<Scalar>(daf.cwiseProduct(c_prev));
    g.b_i += colsum(dai);
    g.b_f += colsum(daf);
    g.b_c += colsum(dag);
    g.b_o += colsum(dao);

    g.xi.weight.noalias() += st.px.transpose() * dai;
    g.xi.bias += colsum(dai);
    g.hi.weight.noalias() += st.ph.transpose() * dai;
    g.hi.bias += colsum(dai);
    g.xf.weight.noalias() += st.px.transpose() * daf;
    g.xf.bias += colsum(daf);
    g.hf.weight.noalias() += st.ph.transpose() * daf;
    g.hf.bias += colsum(daf);
    g.xc.weight.noalias() += st.px.transpose() * dag;
    g.xc.bias += colsum(dag);
    g.hc.weight.noalias() += st.ph.transpose() * dag;
    g.hc.bias += colsum(dag);
    g.xo.weight.noalias() += st.px.transpose() * dao;
    g.xo.bias += colsum(dao);
    g.ho.weight.noalias() += st.ph.transpose() * dao;
    g.ho.bias += colsum(dao);

    Mat<Scalar> dph = dai * p.hi.weight.transpose() + daf * p.hf.weight.transpose() +
                      dag * p.hc.weight.transpose() + dao * p.ho.weight.transpose();
    dh = prop_t * dph;
    dc = std::move(dc_prev);
  }
}

}  // namespace detail

/// Exact gradient of the mean batch loss for every parameter, plus that loss.
/// Non-finite results are rejected with the offending block named.
template <typename Scalar>
BatchGradients<Scalar> gradients(const Model<Scalar>& model, const SnapshotBatch<Scalar>& batch,
                                 const SparseMat<Scalar>& prop) {
  detail::require(!batch.windows.empty(), "gradient batch is empty");
  if (model.task == Task::Regression) {
    detail::require(batch.targets.size() == batch.windows.size(),
                    "regression batch needs one target per window");
  } else {
    detail::require(batch.labels.size() == batch.windows.size(),
                    "classification batch needs one label vector per window");
  }

  BatchGradients<Scalar> out{zeros_like(model), 0.0};
  SparseMat<Scalar> prop_t = prop.transpose();
  const auto bsz = static_cast<double>(batch.windows.size());

  for (std::size_t b = 0; b < batch.windows.size(); ++b) {
    ForwardTrace<Scalar> tr = forward_trace(model, batch.windows[b], prop);
    const Mat<Scalar>& h_final = tr.hidden.back();
    Mat<Scalar> dout;

    if (model.task == Task::Regression) {
      const Mat<Scalar>& target = batch.targets[b];
      out.loss += loss(tr.prediction, target) / bsz;
      const auto scale =
          static_cast<Scalar>(2.0 / (static_cast<double>(tr.prediction.size()) * bsz));
      dout = scale * (tr.prediction - target);
    } else {
      const Eigen::VectorXi& labels = batch.labels[b];
      out.loss += loss(tr.prediction, labels) / bsz;
      dout = tr.prediction.array().exp().matrix();
      for (Eigen::Index r = 0; r < labels.size(); ++r) dout(r, labels[r]) -= Scalar(1);
      dout *= static_cast<Scalar>(1.0 / (static_cast<double>(labels.size()) * bsz));
    }

    out.grads.head.weight.noalias() += h_final.transpose() * dout;
    out.grads.head.bias += detail::colsum(dout);
    Mat<Scalar> dh = dout * model.head.weight.transpose();

    if (model.cell == CellKind::Gcrn) {
      detail::gcrn_backward(model, tr, prop_t, std::move(dh), out.grads.gcrn);
    } else {
      detail::gclstm_backward(model, tr, prop_t, std::move(dh), out.grads.gclstm);
    }
  }

  for (const auto& view : param_views(out.grads)) {
    for (Eigen::Index k = 0; k < view.size; ++k) {
      if (!std::isfinite(static_cast<double>(view.data[k]))) {
        throw std::runtime_error("non-finite gradient in parameter block " + view.name);
      }
    }
  }
  if (!std::isfinite(out.loss)) {
    throw std::runtime_error("non-finite loss with finite gradients");
  }
  return out;
}

/// Full-batch training; one optimizer step per epoch. Deterministic given the
/// model's initial state and the config. The history has exactly
/// config.epochs entries, the loss evaluated before each step.
template <typename Scalar>
std::vector<double> train(Model<Scalar>& model, const SnapshotBatch<Scalar>& batch,
                          const SparseMat<Scalar>& prop, const TrainConfig& config) {
  detail::require(!batch.windows.empty(), "training set is empty");
  detail::require(config.learning_rate >= 0.0, "learning rate must be non-negative");
  detail::require(config.epochs >= 1, "epoch count must be at least 1");

  auto views = param_views(model);
  std::vector<std::vector<Scalar>> moment1(views.size()), moment2(views.size());
  if (config.optimizer == Optimizer::Adam) {
    for (std::size_t k = 0; k < views.size(); ++k) {
      moment1[k].assign(static_cast<std::size_t>(views[k].size), Scalar(0));
      moment2[k].assign(static_cast<std::size_t>(views[k].size), Scalar(0));
    }
  }
  const Scalar lr = static_cast<Scalar>(config.learning_rate);
  const Scalar beta1 = Scalar(0.9);
  const Scalar beta2 = Scalar(0.999);
  const Scalar eps = Scalar(1e-8);

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    BatchGradients<Scalar> bg;
    try {
      bg = gradients(model, batch, prop);
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": " +
                               err.what());
    }
    history.push_back(bg.loss);
    auto gviews = param_views(bg.grads);
    if (config.optimizer == Optimizer::Adam) {
      const Scalar bc1 = Scalar(1) - std::pow(beta1, Scalar(epoch + 1));
      const Scalar bc2 = Scalar(1) - std::pow(beta2, Scalar(epoch + 1));
      for (std::size_t k = 0; k < views.size(); ++k) {
        Scalar* theta = views[k].data;
        const Scalar* grad = gviews[k].data;
        Scalar* m1 = moment1[k].data();
        Scalar* m2 = moment2[k].data();
        for (Eigen::Index j = 0; j < views[k].size; ++j) {
          m1[j] = beta1 * m1[j] + (Scalar(1) - beta1) * grad[j];
          m2[j] = beta2 * m2[j] + (Scalar(1) - beta2) * grad[j] * grad[j];
          theta[j] -= lr * (m1[j] / bc1) / (std::sqrt(m2[j] / bc2) + eps);
        }
      }
    } else {
      for (std::size_t k = 0; k < views.size(); ++k) {
        Scalar* theta = views[k].data;
        const Scalar* grad = gviews[k].data;
        for (Eigen::Index j = 0; j < views[k].size; ++j) theta[j] -= lr * grad[j];
      }
    }
  }
  return history;
}

/// Predictions in natural units: regression outputs are de-standardized,
/// classification outputs are argmax labels with ties resolved to Stable.
struct Predictions {
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::VectorXi> labels;
};

template <typename Scalar>
Predictions predict_batch(const Model<Scalar>& model, const SnapshotBatch<Scalar>& batch,
                          const SparseMat<Scalar>& prop, const StandardizationParams& params) {
  Predictions out;
  for (const auto& window : batch.windows) {
    Mat<Scalar> pred = forward(model, window, prop);
    if (model.task == Task::Regression) {
      Eigen::MatrixXd natural = pred.template cast<double>();
      out.values.push_back(destandardize(natural, params));
    } else {
      Eigen::VectorXi lab(pred.rows());
      for (Eigen::Index r = 0; r < pred.rows(); ++r) {
        lab[r] = pred(r, 1) > pred(r, 0) ? 1 : 0;
      }
      out.labels.push_back(std::move(lab));
    }
  }
  return out;
}

/// Binary model checkpoint: magic, versioned JSON header (architecture,
/// training config, named block shapes), then raw little-endian parameter
/// bytes per block. Round-trips bit-exactly.
template <typename Scalar>
void save_checkpoint(const std::string& path, const Model<Scalar>& model,
                     const TrainConfig& config);

Precision checkpoint_precision(const std::string& path);

template <typename Scalar>
Model<Scalar> load_checkpoint(const std::string& path, TrainConfig* config = nullptr);

}  // namespace stgf
