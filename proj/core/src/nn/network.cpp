#include "fingen/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fingen/errors.hpp"

namespace fingen::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

std::string dims(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
  return out + "]";
}

int conv_pad(int kernel) { return (kernel - 1) / 2; }

int conv_out(int n, int kernel, int stride) { return (n + 2 * conv_pad(kernel) - kernel) / stride + 1; }

// cols is (C k k) x (Ho Wo), row-major.
void im2col(const double* in, int c, int h, int w, int k, int s, int ho, int wo, double* cols) {
  const int pad = conv_pad(k);
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* dst = cols + static_cast<std::size_t>((ch * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < ho; ++oy) {
          const int y = oy * s - pad + ky;
          for (int ox = 0; ox < wo; ++ox) {
            const int x = ox * s - pad + kx;
            dst[oy * wo + ox] = (y >= 0 && y < h && x >= 0 && x < w) ? in[(static_cast<std::size_t>(ch) * h + y) * w + x] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int c, int h, int w, int k, int s, int ho, int wo, double* out) {
  const int pad = conv_pad(k);
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* src = cols + static_cast<std::size_t>((ch * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < ho; ++oy) {
          const int y = oy * s - pad + ky;
          if (y < 0 || y >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int x = ox * s - pad + kx;
            if (x >= 0 && x < w) out[(static_cast<std::size_t>(ch) * h + y) * w + x] += src[oy * wo + ox];
          }
        }
      }
    }
  }
}

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::flatten: return "flatten";
    case LayerKind::maxpool: return "maxpool";
  }
  return "?";
}

}  // namespace

std::vector<std::vector<int>> NetworkSpec::shapes() const {
  if (input_shape.empty()) throw ShapeError("network input shape is empty");
  for (int d : input_shape) {
    if (d <= 0) throw ShapeError("network input shape " + dims(input_shape) + " has a non-positive dimension");
  }
  std::vector<std::vector<int>> out{input_shape};
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const auto& in = out.back();
    const std::string where = "layer " + std::to_string(k) + " (" + kind_name(l.kind) + ")";
    switch (l.kind) {
      case LayerKind::dense:
        if (in.size() != 1) throw ShapeError(where + " needs a flat input, got " + dims(in));
        if (l.units <= 0) throw ShapeError(where + " needs a positive width");
        out.push_back({l.units});
        break;
      case LayerKind::conv: {
        if (in.size() != 3) throw ShapeError(where + " needs a {C,H,W} input, got " + dims(in));
        if (l.units <= 0 || l.kernel <= 0 || l.stride <= 0) throw ShapeError(where + " has non-positive parameters");
        const int ho = conv_out(in[1], l.kernel, l.stride);
        const int wo = conv_out(in[2], l.kernel, l.stride);
        if (ho <= 0 || wo <= 0) throw ShapeError(where + " output would be empty for input " + dims(in));
        out.push_back({l.units, ho, wo});
        break;
      }
      case LayerKind::relu:
        out.push_back(in);
        break;
      case LayerKind::flatten:
        out.push_back({static_cast<int>(Tensor::volume(in))});
        break;
      case LayerKind::maxpool: {
        if (in.size() != 3) throw ShapeError(where + " needs a {C,H,W} input, got " + dims(in));
        if (l.kernel <= 0 || l.stride <= 0) throw ShapeError(where + " has non-positive window");
        const int ho = (in[1] - l.kernel) / l.stride + 1;
        const int wo = (in[2] - l.kernel) / l.stride + 1;
        if (ho <= 0 || wo <= 0) throw ShapeError(where + " window larger than input " + dims(in));
        out.push_back({in[0], ho, wo});
        break;
      }
    }
  }
  return out;
}

NetworkSpec NetworkSpec::mlp(int inputs, const std::vector<int>& hidden, int outputs) {
  NetworkSpec spec;
  spec.input_shape = {inputs};
  for (int h : hidden) {
    spec.layers.push_back(LayerSpec::dense(h));
    spec.layers.push_back(LayerSpec::relu());
  }
  spec.layers.push_back(LayerSpec::dense(outputs));
  return spec;
}

nlohmann::json to_json(const NetworkSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    nlohmann::json j{{"kind", kind_name(l.kind)}};
    if (l.kind == LayerKind::dense) j["units"] = l.units;
    if (l.kind == LayerKind::conv) {
      j["channels"] = l.units;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
    }
    if (l.kind == LayerKind::maxpool) {
      j["window"] = l.kernel;
      j["stride"] = l.stride;
    }
    layers.push_back(std::move(j));
  }
  return {{"input_shape", spec.input_shape}, {"layers", std::move(layers)}};
}

NetworkSpec network_spec_from_json(const nlohmann::json& doc) {
  try {
    NetworkSpec spec;
    spec.input_shape = doc.at("input_shape").get<std::vector<int>>();
    for (const auto& j : doc.at("layers")) {
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "dense") {
        spec.layers.push_back(LayerSpec::dense(j.at("units").get<int>()));
      } else if (kind == "conv") {
        spec.layers.push_back(LayerSpec::conv(j.at("channels").get<int>(), j.at("kernel").get<int>(), j.value("stride", 1)));
      } else if (kind == "relu") {
        spec.layers.push_back(LayerSpec::relu());
      } else if (kind == "flatten") {
        spec.layers.push_back(LayerSpec::flatten());
      } else if (kind == "maxpool") {
        LayerSpec l = LayerSpec::maxpool(j.value("window", 2));
        l.stride = j.value("stride", l.kernel);
        spec.layers.push_back(l);
      } else {
        throw ParseError("unknown layer kind '" + kind + "'");
      }
    }
    spec.shapes();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed network spec: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(std::string("inconsistent network spec: ") + e.what());
  }
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)), shapes_(spec_.shapes()) {
  for (std::size_t k = 0; k < spec_.layers.size(); ++k) {
    const auto& l = spec_.layers[k];
    const auto& in = shapes_[k];
    std::size_t w = 0;
    std::size_t b = 0;
    if (l.kind == LayerKind::dense) {
      w = static_cast<std::size_t>(l.units) * in[0];
      b = l.units;
    } else if (l.kind == LayerKind::conv) {
      w = static_cast<std::size_t>(l.units) * in[0] * l.kernel * l.kernel;
      b = l.units;
    }
    offsets_.push_back(total_);
    weights_.push_back(w);
    biases_.push_back(b);
    total_ += w + b;
  }
}

std::vector<double> Network::initial_parameters(std::mt19937_64& rng, double output_scale) const {
  std::vector<double> params(total_, 0.0);
  std::size_t last = spec_.layers.size();
  for (std::size_t k = 0; k < spec_.layers.size(); ++k) {
    if (weights_[k] > 0) last = k;
  }
  for (std::size_t k = 0; k < spec_.layers.size(); ++k) {
    if (weights_[k] == 0) continue;
    const std::size_t fan_in = weights_[k] / biases_[k];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in)) * (k == last ? output_scale : 1.0);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < weights_[k]; ++i) params[offsets_[k] + i] = dist(rng);
  }
  return params;
}

Tensor Network::forward(std::span<const double> params, const Tensor& input, ForwardRecord* record) const {
  if (params.size() != total_) {
    throw ShapeError("network expects " + std::to_string(total_) + " parameters, got " + std::to_string(params.size()));
  }
  if (input.shape.size() != shapes_[0].size() + 1 ||
      !std::equal(shapes_[0].begin(), shapes_[0].end(), input.shape.begin() + 1)) {
    throw ShapeError("network input must be [B," + dims(shapes_[0]).substr(1) + ", got " + input.shape_string());
  }
  const int batch = input.batch();
  if (record) {
    record->inputs.clear();
    record->pool_index.assign(spec_.layers.size(), {});
    record->valid = false;
  }
  Tensor x = input;
  std::vector<double> cols;
  for (std::size_t k = 0; k < spec_.layers.size(); ++k) {
    const auto& l = spec_.layers[k];
    const auto& in = shapes_[k];
    const auto& os = shapes_[k + 1];
    std::vector<int> out_shape{batch};
    out_shape.insert(out_shape.end(), os.begin(), os.end());
    Tensor y(out_shape);
    const double* w = params.data() + offsets_[k];
    const double* b = w + weights_[k];
    switch (l.kind) {
      case LayerKind::dense: {
        CMapMat X(x.data.data(), batch, in[0]);
        CMapMat W(w, l.units, in[0]);
        MapMat Y(y.data.data(), batch, l.units);
        Y.noalias() = X * W.transpose();
        Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b, l.units);
        break;
      }
      case LayerKind::conv: {
        const int c = in[0];
        const int ho = os[1];
        const int wo = os[2];
        const int rows = c * l.kernel * l.kernel;
        const int plane = ho * wo;
        cols.resize(static_cast<std::size_t>(rows) * plane);
        CMapMat W(w, l.units, rows);
        for (int s = 0; s < batch; ++s) {
          im2col(x.row(s), c, in[1], in[2], l.kernel, l.stride, ho, wo, cols.data());
          MapMat Y(y.row(s), l.units, plane);
          Y.noalias() = W * CMapMat(cols.data(), rows, plane);
          Y.colwise() += Eigen::Map<const Eigen::VectorXd>(b, l.units);
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
        break;
      case LayerKind::flatten:
        y.data = x.data;
        break;
      case LayerKind::maxpool: {
        const int c = in[0];
        const int h = in[1];
        const int wd = in[2];
        const int ho = os[1];
        const int wo = os[2];
        std::vector<int> arg(y.data.size());
        for (int s = 0; s < batch; ++s) {
          const double* src = x.row(s);
          double* dst = y.row(s);
          int* idx = arg.data() + static_cast<std::size_t>(s) * c * ho * wo;
          for (int ch = 0; ch < c; ++ch) {
            for (int oy = 0; oy < ho; ++oy) {
              for (int ox = 0; ox < wo; ++ox) {
                int best = -1;
                double value = 0.0;
                for (int dy = 0; dy < l.kernel; ++dy) {
                  for (int dx = 0; dx < l.kernel; ++dx) {
                    const int at = (ch * h + oy * l.stride + dy) * wd + ox * l.stride + dx;
                    if (best < 0 || src[at] > value) {
                      best = at;
                      value = src[at];
                    }
                  }
                }
                const int o = (ch * ho + oy) * wo + ox;
                dst[o] = value;
                idx[o] = best;
              }
            }
          }
        }
        if (record) record->pool_index[k] = std::move(arg);
        break;
      }
    }
    if (record) record->inputs.push_back(std::move(x));
    x = std::move(y);
  }
  if (record) record->valid = true;
  return x;
}

Tensor Network::backward(std::span<const double> params, const ForwardRecord& record, const Tensor& upstream,
                         std::span<double> grads) const {
  if (!record.valid || record.inputs.size() != spec_.layers.size()) {
    throw StateError("backward called without a recorded forward pass");
  }
  if (params.size() != total_ || grads.size() != total_) throw ShapeError("parameter/gradient size mismatch");
  const int batch = record.inputs.empty() ? upstream.batch() : record.inputs[0].batch();
  std::vector<int> expect{batch};
  expect.insert(expect.end(), shapes_.back().begin(), shapes_.back().end());
  if (upstream.shape != expect) {
    throw ShapeError("upstream gradient must be " + dims(expect) + ", got " + upstream.shape_string());
  }
  Tensor g = upstream;
  std::vector<double> cols;
  std::vector<double> dcols;
  for (std::size_t kk = spec_.layers.size(); kk-- > 0;) {
    const auto& l = spec_.layers[kk];
    const auto& in = shapes_[kk];
    const auto& os = shapes_[kk + 1];
    const Tensor& x = record.inputs[kk];
    Tensor dx(x.shape);
    const double* w = params.data() + offsets_[kk];
    double* gw = grads.data() + offsets_[kk];
    double* gb = gw + weights_[kk];
    switch (l.kind) {
      case LayerKind::dense: {
        CMapMat X(x.data.data(), batch, in[0]);
        CMapMat W(w, l.units, in[0]);
        CMapMat G(g.data.data(), batch, l.units);
        MapMat GW(gw, l.units, in[0]);
        GW.noalias() += G.transpose() * X;
        Eigen::Map<Eigen::RowVectorXd>(gb, l.units) += G.colwise().sum();
        MapMat(dx.data.data(), batch, in[0]).noalias() = G * W;
        break;
      }
      case LayerKind::conv: {
        const int c = in[0];
        const int ho = os[1];
        const int wo = os[2];
        const int rows = c * l.kernel * l.kernel;
        const int plane = ho * wo;
        cols.resize(static_cast<std::size_t>(rows) * plane);
        dcols.resize(cols.size());
        CMapMat W(w, l.units, rows);
        MapMat GW(gw, l.units, rows);
        Eigen::Map<Eigen::VectorXd> GB(gb, l.units);
        for (int s = 0; s < batch; ++s) {
          im2col(x.row(s), c, in[1], in[2], l.kernel, l.stride, ho, wo, cols.data());
          CMapMat G(g.row(s), l.units, plane);
          GW.noalias() += G * CMapMat(cols.data(), rows, plane).transpose();
          GB += G.rowwise().sum();
          MapMat(dcols.data(), rows, plane).noalias() = W.transpose() * G;
          col2im(dcols.data(), c, in[1], in[2], l.kernel, l.stride, ho, wo, dx.row(s));
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.data.size(); ++i) dx.data[i] = x.data[i] > 0.0 ? g.data[i] : 0.0;
        break;
      case LayerKind::flatten:
        dx.data = g.data;
        break;
      case LayerKind::maxpool: {
        const auto& idx = record.pool_index[kk];
        const std::size_t per_out = g.stride();
        const std::size_t per_in = x.stride();
        for (int s = 0; s < batch; ++s) {
          for (std::size_t o = 0; o < per_out; ++o) {
            dx.data[s * per_in + idx[s * per_out + o]] += g.data[s * per_out + o];
          }
        }
        break;
      }
    }
    g = std::move(dx);
  }
  return g;
}

}  // namespace fingen::nn
