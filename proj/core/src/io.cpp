// Copyright 2026 The qrnme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qrnme/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qrnme/errors.hpp"
#include "qrnme/qrn.hpp"

namespace qrnme::io {

using experiments::Dataset;
using experiments::ExperimentConfig;
using json = nlohmann::json;

namespace {

json decay_to_json(const dynamics::DecayParams& p) {
  return {{"gamma0", p.gamma0}, {"lambda", p.lambda}};
}

dynamics::DecayParams decay_from_json(const json& j) {
  return {j.at("gamma0").get<double>(), j.at("lambda").get<double>()};
}

json couplings_to_json(const dynamics::Couplings& c) {
  return {{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}};
}

dynamics::Couplings couplings_from_json(const json& j) {
  return {j.at("c1").get<double>(), j.at("c2").get<double>(), j.at("c3").get<double>()};
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"experiment", c.experiment},
      {"n_train", c.n_train},
      {"n_test", c.n_test},
      {"dt", c.dt},
      {"t_max", c.t_max},
      {"t_eval", c.t_eval},
      {"omega", c.omega},
      {"decay1", decay_to_json(c.decay1)},
      {"decay2", decay_to_json(c.decay2)},
      {"couplings", couplings_to_json(c.couplings)},
      {"omega_range", {c.omega_min, c.omega_max}},
      {"mu", c.mu_count},
      {"lamb_shift", c.include_lamb_shift},
      {"seed", c.seed},
      {"epochs", c.epochs},
      {"batch", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"hidden", c.hidden},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<int>();
  c.n_train = j.at("n_train").get<std::size_t>();
  c.n_test = j.at("n_test").get<std::size_t>();
  c.dt = j.at("dt").get<double>();
  c.t_max = j.at("t_max").get<double>();
  c.t_eval = j.at("t_eval").get<double>();
  c.omega = j.at("omega").get<double>();
  c.decay1 = decay_from_json(j.at("decay1"));
  c.decay2 = decay_from_json(j.at("decay2"));
  c.couplings = couplings_from_json(j.at("couplings"));
  c.omega_min = j.at("omega_range").at(0).get<double>();
  c.omega_max = j.at("omega_range").at(1).get<double>();
  c.mu_count = j.at("mu").get<std::size_t>();
  c.include_lamb_shift = j.at("lamb_shift").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.hidden = j.at("hidden").get<std::size_t>();
  return c;
}

void check_format(const json& doc, const char* format) {
  if (!doc.is_object() || doc.value("format", std::string{}) != format) {
    throw SchemaError(std::string("not a ") + format + " document");
  }
  const int version = doc.value("schema_version", -1);
  if (version != kSchemaVersion) {
    throw SchemaError("unsupported schema version " + std::to_string(version));
  }
}

template <class Fn>
auto schema_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace

std::string dataset_to_string(const Dataset& ds) {
  json header = {
      {"experiment", ds.experiment},
      {"dim", ds.dim},
      {"dt", ds.dt},
      {"n_steps", ds.n_steps},
      {"seed", ds.seed},
      {"split", ds.split},
      {"n_records", ds.records.size()},
      {"encoding", "re-im-row-major"},
      {"model",
       {{"omega", ds.omega},
        {"decay1", decay_to_json(ds.decay1)},
        {"decay2", decay_to_json(ds.decay2)},
        {"couplings", couplings_to_json(ds.couplings)},
        {"omega_range", {ds.omega_min, ds.omega_max}}}},
  };
  std::ostringstream out;
  out << "{\n\"format\": \"qrnme-dataset\",\n\"schema_version\": " << kSchemaVersion
      << ",\n\"header\": " << header.dump() << ",\n\"records\": [";
  for (std::size_t a = 0; a < ds.records.size(); ++a) {
    const auto& rec = ds.records[a];
    json r = json::object();
    if (rec.omega) r["omega"] = *rec.omega;
    json states = json::array();
    for (const auto& s : rec.trajectory.states) states.push_back(qrn::encode_complex(s.mat()));
    r["states"] = std::move(states);
    out << (a == 0 ? "\n" : ",\n") << r.dump();
  }
  out << "\n]\n}\n";
  return out.str();
}

Dataset dataset_from_string(const std::string& text) {
  return schema_guard([&] {
    const json doc = json::parse(text);
    check_format(doc, "qrnme-dataset");
    const json& h = doc.at("header");
    Dataset ds;
    ds.experiment = h.at("experiment").get<int>();
    ds.dim = h.at("dim").get<std::size_t>();
    ds.dt = h.at("dt").get<double>();
    ds.n_steps = h.at("n_steps").get<std::size_t>();
    ds.seed = h.at("seed").get<std::uint64_t>();
    ds.split = h.at("split").get<std::string>();
    const json& m = h.at("model");
    ds.omega = m.at("omega").get<double>();
    ds.decay1 = decay_from_json(m.at("decay1"));
    ds.decay2 = decay_from_json(m.at("decay2"));
    ds.couplings = couplings_from_json(m.at("couplings"));
    ds.omega_min = m.at("omega_range").at(0).get<double>();
    ds.omega_max = m.at("omega_range").at(1).get<double>();
    const json& records = doc.at("records");
    if (records.size() != h.at("n_records").get<std::size_t>()) {
      throw SchemaError("record count does not match the header");
    }
    ds.records.reserve(records.size());
    for (const auto& r : records) {
      experiments::Record rec;
      if (r.contains("omega")) rec.omega = r.at("omega").get<double>();
      rec.trajectory.t0 = 0.0;
      rec.trajectory.dt = ds.dt;
      for (const auto& enc : r.at("states")) {
        const auto v = enc.get<std::vector<double>>();
        if (v.size() != 2 * ds.dim * ds.dim) throw SchemaError("state encoding has wrong length");
        rec.trajectory.states.push_back(
            dynamics::DensityMatrix::unchecked(qrn::decode_complex(v, ds.dim)));
      }
      ds.records.push_back(std::move(rec));
    }
    ds.validate();
    return ds;
  });
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  atomic_write(path, dataset_to_string(ds));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return dataset_from_string(read_file(path));
}

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  const auto& net = ckpt.state.net;
  const auto& shape = net.shape();
  json blocks = json::array();
  for (const auto& b : net.blocks()) {
    blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});
  }
  const auto params = net.parameters();
  json doc = {
      {"format", "qrnme-checkpoint"},
      {"schema_version", kSchemaVersion},
      {"config", config_to_json(ckpt.config)},
      {"network",
       {{"input_size", shape.input_size},
        {"hidden_size", shape.hidden_size},
        {"output_size", shape.output_size},
        {"num_layers", shape.num_layers},
        {"blocks", blocks},
        {"parameters", std::vector<double>(params.begin(), params.end())}}},
      {"optimizer",
       {{"step", ckpt.state.adam.step},
        {"learning_rate", ckpt.state.adam.learning_rate},
        {"beta1", ckpt.state.adam.beta1},
        {"beta2", ckpt.state.adam.beta2},
        {"epsilon", ckpt.state.adam.epsilon},
        {"m", ckpt.state.adam.m},
        {"v", ckpt.state.adam.v}}},
      {"epoch", ckpt.state.epoch},
      {"epoch_losses", ckpt.state.epoch_losses},
  };
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  return schema_guard([&] {
    const json doc = json::parse(text);
    check_format(doc, "qrnme-checkpoint");
    Checkpoint ckpt;
    ckpt.config = config_from_json(doc.at("config"));
    const json& n = doc.at("network");
    neural::NetworkShape shape{n.at("input_size").get<std::size_t>(),
                               n.at("hidden_size").get<std::size_t>(),
                               n.at("output_size").get<std::size_t>(),
                               n.at("num_layers").get<std::size_t>()};
    neural::GruNetwork net(shape);
    const auto& blocks = n.at("blocks");
    if (blocks.size() != net.blocks().size()) throw SchemaError("parameter block count differs");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = net.blocks()[k];
      if (blocks[k].at("name").get<std::string>() != b.name ||
          blocks[k].at("offset").get<std::size_t>() != b.offset ||
          blocks[k].at("size").get<std::size_t>() != b.size) {
        throw SchemaError("parameter block " + b.name + " does not match the layout");
      }
    }
    const auto params = n.at("parameters").get<std::vector<double>>();
    if (params.size() != net.parameter_count()) throw SchemaError("parameter count differs");
    std::copy(params.begin(), params.end(), net.parameters().begin());
    ckpt.state.net = std::move(net);

    const json& o = doc.at("optimizer");
    auto& adam = ckpt.state.adam;
    adam.step = o.at("step").get<long>();
    adam.learning_rate = o.at("learning_rate").get<double>();
    adam.beta1 = o.at("beta1").get<double>();
    adam.beta2 = o.at("beta2").get<double>();
    adam.epsilon = o.at("epsilon").get<double>();
    adam.m = o.at("m").get<std::vector<double>>();
    adam.v = o.at("v").get<std::vector<double>>();
    if (adam.m.size() != params.size() || adam.v.size() != params.size()) {
      throw SchemaError("optimizer moments do not match the parameter count");
    }
    ckpt.state.epoch = doc.at("epoch").get<std::size_t>();
    ckpt.state.epoch_losses = doc.at("epoch_losses").get<std::vector<double>>();
    if (shape != ckpt.config.network_shape()) {
      throw SchemaError("network shape does not match the stored experiment config");
    }
    return ckpt;
  });
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  atomic_write(path, checkpoint_to_string(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_string(read_file(path));
}

std::string metrics_to_csv(const experiments::MetricsCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "time," << curve.metric << ",n\n";
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    out << curve.times[j] << ',' << curve.values[j] << ',' << curve.samples << '\n';
  }
  return out.str();
}

std::string loss_log(const std::vector<double>& epoch_losses) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t e = 0; e < epoch_losses.size(); ++e) {
    out << (e + 1) << ' ' << epoch_losses[e] << '\n';
  }
  return out.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace qrnme::io
