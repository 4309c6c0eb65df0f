#include "gfolio/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gfolio {

namespace {

constexpr const char* kHeader = "gfolio-checkpoint v1";

void write_values(std::ofstream& out, const Tensor& t) {
  char buf[64];
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof(buf), i == 0 ? "%.17g" : " %.17g", t[i]);
    out << buf;
  }
  out << "\n";
}

Eigen::ArrayXd read_values(std::istream& in, Eigen::Index count, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("checkpoint: truncated at " + what);
  std::istringstream is(line);
  Eigen::ArrayXd values(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!(is >> values[i])) {
      throw data_error("checkpoint: expected " + std::to_string(count) + " values for " + what);
    }
  }
  double extra;
  if (is >> extra) throw data_error("checkpoint: surplus values for " + what);
  return values;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const ParamStore*>>& sections) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write checkpoint '" + path + "'");
  out << kHeader << "\n";
  for (const auto& [name, store] : sections) {
    out << "section " << name << " " << store->size() << "\n";
    for (size_t i = 0; i < store->size(); ++i) {
      const Param& p = (*store)[i];
      out << "param " << p.name << " " << p.value.rank();
      for (int d : p.value.shape()) out << " " << d;
      out << "\n";
      write_values(out, p.value);
      write_values(out, p.adam.first_moment);
      write_values(out, p.adam.second_moment);
      out << "step " << p.adam.step_count << "\n";
    }
  }
  if (!out) throw data_error("failed writing checkpoint '" + path + "'");
}

void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, ParamStore*>>& sections) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open checkpoint '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw data_error("checkpoint '" + path + "': bad or missing header");
  }
  for (const auto& [name, store] : sections) {
    std::string keyword, section_name;
    size_t count = 0;
    if (!(in >> keyword >> section_name >> count) || keyword != "section") {
      throw data_error("checkpoint: expected section '" + name + "'");
    }
    if (section_name != name) {
      throw data_error("checkpoint: section '" + section_name + "' where '" + name +
                       "' was expected");
    }
    if (count != store->size()) {
      throw data_error("checkpoint: section '" + name + "' holds " + std::to_string(count) +
                       " parameters, model expects " + std::to_string(store->size()));
    }
    for (size_t i = 0; i < count; ++i) {
      std::string param_name;
      int rank = 0;
      if (!(in >> keyword >> param_name >> rank) || keyword != "param") {
        throw data_error("checkpoint: malformed parameter header in section '" + name + "'");
      }
      Shape shape(static_cast<size_t>(rank));
      for (int& d : shape) {
        if (!(in >> d)) throw data_error("checkpoint: truncated shape for '" + param_name + "'");
      }
      in.ignore(1, '\n');

      Param& p = (*store)[i];
      if (p.name != param_name) {
        throw data_error("checkpoint: parameter '" + param_name + "' where '" + p.name +
                         "' was expected in section '" + name + "'");
      }
      if (shape != p.value.shape()) {
        throw data_error("checkpoint: parameter '" + param_name + "' has shape " +
                         shape_str(shape) + ", model expects " + shape_str(p.value.shape()));
      }
      const Eigen::Index numel = p.value.size();
      p.value = Tensor(shape, read_values(in, numel, param_name + " values"));
      p.adam.first_moment = Tensor(shape, read_values(in, numel, param_name + " first moments"));
      p.adam.second_moment = Tensor(shape, read_values(in, numel, param_name + " second moments"));
      if (!(in >> keyword >> p.adam.step_count) || keyword != "step") {
        throw data_error("checkpoint: missing step count for '" + param_name + "'");
      }
      in.ignore(1, '\n');
      p.grad = Tensor::zeros(shape);
    }
  }
}

}  // namespace gfolio
