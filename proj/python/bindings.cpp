// Copyright 2026 The wxforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstring>

#include "wxforge/analysis.hpp"
#include "wxforge/augment.hpp"
#include "wxforge/embeddings.hpp"
#include "wxforge/manifest.hpp"
#include "wxforge/metrics.hpp"
#include "wxforge/pipeline.hpp"

namespace py = pybind11;
using namespace wxforge;

namespace {

using Rows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::array_t<std::uint8_t> to_array(const ImageRgb& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.pixels().size());
  return out;
}

py::tuple read_wxe(const std::filesystem::path& path) {
  const EmbeddingSet s = read_embeddings(path);
  FloatArray rows({s.n, s.dim});
  std::copy(s.data.begin(), s.data.end(), rows.mutable_data());
  return py::make_tuple(rows, s.ids, s.space_tag);
}

void write_wxe(const std::filesystem::path& path, FloatArray rows, std::vector<std::string> ids,
               std::string space_tag) {
  if (rows.ndim() != 2) throw Error(errc::kInvalidArgument, "rows must be a 2-D array");
  EmbeddingSet s;
  s.n = static_cast<std::size_t>(rows.shape(0));
  s.dim = static_cast<std::size_t>(rows.shape(1));
  s.data.assign(rows.data(), rows.data() + rows.size());
  s.ids = std::move(ids);
  s.space_tag = std::move(space_tag);
  write_embeddings(s, path);
}

py::array_t<std::uint8_t> augment_source(const std::filesystem::path& sources,
                                         const std::string& image_id, const std::string& family,
                                         int level, std::uint64_t seed) {
  const auto records = read_sources(sources);
  const auto it = std::find_if(records.begin(), records.end(),
                               [&](const SourceRecord& r) { return r.image_id == image_id; });
  if (it == records.end()) throw Error(errc::kInvalidArgument, "unknown image id " + image_id);
  const Family f = parse_family(family);
  const LoadedScene scene = load_scene(*it, family_needs_depth(f));
  ImageRgb out;
  {
    py::gil_scoped_release release;
    out = augment(AugSpec::from_level(f, level, seed), scene.view(), scene.image_id);
  }
  return to_array(out);
}

}  // namespace

PYBIND11_MODULE(_wxforge, m) {
  m.doc() = "Weather augmentation, embedding distances and their analysis.";

  // Error kinds travel as the first exception argument.
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.kind(), e.what()).ptr());
    }
  });

  m.def("families", [] {
    std::vector<std::string> names;
    for (Family f : all_families()) names.emplace_back(family_name(f));
    return names;
  });
  m.def("augment_source", &augment_source, py::arg("sources"), py::arg("image_id"),
        py::arg("family"), py::arg("level"), py::arg("seed") = 0,
        "Augmented image of one ingested record as an H×W×3 uint8 array.");

  m.def("read_embeddings", &read_wxe, py::arg("path"), "(rows, ids, space_tag) of a WXE1 file.");
  m.def("write_embeddings", &write_wxe, py::arg("path"), py::arg("rows"), py::arg("ids"),
        py::arg("space_tag"));

  m.def(
      "frechet",
      [](const Rows& x, const Rows& y) {
        py::gil_scoped_release release;
        return frechet_distance(gaussian_stats(Eigen::MatrixXd(x)),
                                gaussian_stats(Eigen::MatrixXd(y)));
      },
      py::arg("x"), py::arg("y"), "Fréchet distance of Gaussian fits to two row sets.");
  m.def(
      "mmd2",
      [](const Rows& x, const Rows& y, double sigma, double scale, bool unbiased) {
        py::gil_scoped_release release;
        return mmd2(Eigen::MatrixXd(x), Eigen::MatrixXd(y),
                    MmdOptions{sigma, scale,
                               unbiased ? MmdEstimator::kUnbiased : MmdEstimator::kBiased});
      },
      py::arg("x"), py::arg("y"), py::arg("sigma") = 10.0, py::arg("scale") = 1000.0,
      py::arg("unbiased") = true);
  m.def(
      "contrastive",
      [](const std::map<std::string, double>& d, const std::string& target) {
        return contrastive(std::map<std::string, double, std::less<>>(d.begin(), d.end()), target);
      },
      py::arg("distances"), py::arg("target"));

  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const CorrelationResult c = pearson(x, y);
        return py::make_tuple(c.r, c.p, c.n);
      },
      py::arg("x"), py::arg("y"), "(r, two-sided p, n).");
  m.def("pearson_p_value", &pearson_p_value, py::arg("r"), py::arg("n"));
}
