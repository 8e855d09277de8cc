#include "pbt/json_io.hpp"

#include <fstream>

#include "pbt/errors.hpp"

namespace pbt {

using nlohmann::json;

json matrix_to_json(const CMat& m, const TensorSpace& space) {
  if (!m.square() || m.rows() != space.dim())
    throw ValidationError("matrix_to_json: shape does not match space");
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"dims", space.dims()},
              {"labels", space.labels()},
              {"re", std::move(re)},
              {"im", std::move(im)}};
}

CMat matrix_from_json(const json& j, TensorSpace* space_out) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("re"))
    throw ValidationError("matrix json: need at least 'dims' and 're'");
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    labels = j.at("labels").get<std::vector<std::string>>();
  } else {
    for (std::size_t i = 0; i < dims.size(); ++i) labels.push_back("F" + std::to_string(i + 1));
  }
  TensorSpace space(labels, dims);
  const std::size_t dim = space.dim();
  const auto& re = j.at("re");
  if (!re.is_array() || re.size() != dim) throw ValidationError("matrix json: 're' shape mismatch");
  CMat m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!re[i].is_array() || re[i].size() != dim)
      throw ValidationError("matrix json: 're' row shape mismatch");
    for (std::size_t jx = 0; jx < dim; ++jx) m(i, jx) = cplx(re[i][jx].get<double>(), 0.0);
  }
  if (j.contains("im")) {
    const auto& im = j.at("im");
    if (!im.is_array() || im.size() != dim)
      throw ValidationError("matrix json: 'im' shape mismatch");
    for (std::size_t i = 0; i < dim; ++i) {
      if (!im[i].is_array() || im[i].size() != dim)
        throw ValidationError("matrix json: 'im' row shape mismatch");
      for (std::size_t jx = 0; jx < dim; ++jx)
        m(i, jx) += cplx(0.0, im[i][jx].get<double>());
    }
  }
  if (space_out) *space_out = space;
  return m;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("json parse error in " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open file for writing: " + path);
  out << text;
}

}  // namespace pbt
