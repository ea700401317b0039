#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "specswin/bandseq.hpp"
#include "specswin/cascade.hpp"
#include "specswin/cli.hpp"
#include "specswin/cube.hpp"
#include "specswin/datapipe.hpp"
#include "specswin/error.hpp"
#include "specswin/metrics.hpp"

namespace py = pybind11;
using namespace specswin;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

// numpy arrays are (H, W, B); cubes store band-sequential planes.
SpectralCube cube_from_array(const FloatArray& arr, std::vector<double> wavelengths, double gsd) {
    if (arr.ndim() != 3) throw py::value_error("expected an array of shape (H, W, B)");
    const int h = static_cast<int>(arr.shape(0)), w = static_cast<int>(arr.shape(1)), b = static_cast<int>(arr.shape(2));
    if (wavelengths.empty()) {
        for (int i = 0; i < b; ++i) wavelengths.push_back(400.0 + 10.0 * i);
    }
    if (static_cast<int>(wavelengths.size()) != b) throw py::value_error("one wavelength per band is required");
    SpectralCube cube(h, w, std::move(wavelengths), gsd);
    auto v = arr.unchecked<3>();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < b; ++k) cube.at(y, x, k) = v(y, x, k);
    cube.validate();
    return cube;
}

py::array_t<float> cube_to_array(const SpectralCube& cube) {
    py::array_t<float> out({cube.height, cube.width, cube.bands});
    auto v = out.mutable_unchecked<3>();
    for (int y = 0; y < cube.height; ++y)
        for (int x = 0; x < cube.width; ++x)
            for (int k = 0; k < cube.bands; ++k) v(y, x, k) = cube.at(y, x, k);
    return out;
}

py::array_t<double> index_to_array(const IndexMap& m) {
    py::array_t<double> out({m.height, m.width});
    std::copy(m.values.begin(), m.values.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hyperspectral band reconstruction: band sequences, cascade planning and quality metrics";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

    py::class_<SpectralCube>(m, "SpectralCube")
        .def(py::init(&cube_from_array), py::arg("array"), py::arg("wavelengths") = std::vector<double>{},
             py::arg("gsd") = 1.0)
        .def_readonly("height", &SpectralCube::height)
        .def_readonly("width", &SpectralCube::width)
        .def_readonly("bands", &SpectralCube::bands)
        .def_readonly("wavelengths", &SpectralCube::wavelengths)
        .def_readonly("band_ids", &SpectralCube::band_ids)
        .def_readonly("gsd", &SpectralCube::gsd)
        .def("to_numpy", &cube_to_array)
        .def("__repr__", [](const SpectralCube& c) {
            std::ostringstream s;
            s << "SpectralCube(" << c.height << "x" << c.width << "x" << c.bands << ")";
            return s.str();
        });

    m.def("load_cube", &load_cube, py::arg("path"));
    m.def("save_cube", &save_cube, py::arg("cube"), py::arg("path"));
    m.def(
        "synthetic_scene",
        [](int height, int width, std::vector<double> wavelengths, int endmembers, double noise, std::uint64_t seed) {
            SyntheticSceneParams p;
            p.height = height;
            if (!wavelengths.empty()) p.wavelengths = std::move(wavelengths);
            p.width = width;
            p.endmembers = endmembers;
            p.noise = noise;
            p.seed = seed;
            return make_synthetic_scene(p);
        },
        py::arg("height") = 128, py::arg("width") = 128, py::arg("wavelengths") = std::vector<double>{},
        py::arg("endmembers") = 4, py::arg("noise") = 0.002,
        py::arg("seed") = 0);
    m.def(
        "linear_interpolation",
        [](const SpectralCube& msi, const std::vector<double>& wavelengths) {
            return spectral_linear_interpolation(msi, wavelengths);
        },
        py::arg("msi"), py::arg("target_wavelengths"));

    // band sequences
    py::class_<BandSequence>(m, "BandSequence")
        .def_static("from_order", &BandSequence::from_order, py::arg("order"))
        .def_readonly("order", &BandSequence::order)
        .def_readonly("bands", &BandSequence::bands)
        .def_readonly("coverage", &BandSequence::coverage)
        .def_property_readonly("depth", &BandSequence::depth)
        .def("is_complete", &BandSequence::is_complete);
    m.def("paper_sequence", &paper_sequence);
    m.def("min_sequence_length", &min_sequence_length, py::arg("n"));
    m.def(
        "build_sequence", [](const std::vector<int>& bands, int depth) { return build_sequence(bands, depth); },
        py::arg("bands"), py::arg("depth"));
    m.def(
        "missing_pairs",
        [](const BandSequence& seq, int max_distance) { return validate_coverage(seq, max_distance).missing; },
        py::arg("sequence"), py::arg("max_distance") = 1);
    m.def("parse_band_list", &parse_band_list, py::arg("text"));

    // cascade planning
    py::enum_<Strategy>(m, "Strategy")
        .value("PHYSICAL", Strategy::Physical)
        .value("MUTUAL_INFO", Strategy::MutualInfo)
        .value("VARIANCE", Strategy::Variance)
        .value("SPECTRAL_PHYSICS", Strategy::SpectralPhysics)
        .value("CORRELATION", Strategy::Correlation)
        .value("UNIFORM", Strategy::Uniform);
    m.def("parse_strategy", &parse_strategy, py::arg("name"));
    m.def(
        "pyramid_levels", [](Strategy s) { return pyramid_from_table(s).levels; }, py::arg("strategy"));
    m.def(
        "finetune_bands", [](Strategy s) { return pyramid_from_table(s).finetune_bands; }, py::arg("strategy"));
    m.def("cascade_epoch_schedule", &cascade_epoch_schedule, py::arg("base") = 80, py::arg("decay") = 0.9,
          py::arg("floor") = 40, py::arg("levels") = 5);
    m.def("finetune_epochs", &finetune_epochs, py::arg("similarity"), py::arg("band_distance"));
    m.def(
        "pearson", [](const std::vector<double>& a, const std::vector<double>& b) { return pearson(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "mutual_information",
        [](const std::vector<double>& a, const std::vector<double>& b, int bins) {
            return mutual_information(a, b, bins);
        },
        py::arg("a"), py::arg("b"), py::arg("bins") = 64);

    // metrics
    m.def("psnr", &psnr, py::arg("ref"), py::arg("rec"));
    m.def("rmse", &rmse, py::arg("ref"), py::arg("rec"));
    m.def("ergas", &ergas, py::arg("ref"), py::arg("rec"), py::arg("ratio") = 1.0);
    m.def("sam", &sam, py::arg("ref"), py::arg("rec"));
    m.def("q_index", &q_index, py::arg("ref"), py::arg("rec"));
    m.def("ssim", &ssim, py::arg("ref"), py::arg("rec"));
    m.def("ssim_windowed", &ssim_windowed, py::arg("ref"), py::arg("rec"), py::arg("window") = 7);
    m.def(
        "evaluate",
        [](const SpectralCube& ref, const SpectralCube& rec, std::optional<int> best_k, double ergas_ratio) {
            const MetricReport r = evaluate(ref, rec, best_k, ergas_ratio);
            py::dict d;
            d["bands"] = r.bands;
            d["psnr"] = r.psnr;
            d["ergas"] = r.ergas;
            d["sam"] = r.sam;
            d["q"] = r.q;
            d["ssim"] = r.ssim;
            d["rmse"] = r.rmse;
            d["band_psnr"] = r.band_psnr;
            return d;
        },
        py::arg("ref"), py::arg("rec"), py::arg("best_k") = py::none(), py::arg("ergas_ratio") = 1.0);

    // spectral indices
    m.def(
        "ndvi", [](const SpectralCube& c) { return index_to_array(compute_index(c, IndexKind::NDVI)); },
        py::arg("cube"));
    m.def(
        "nbr", [](const SpectralCube& c) { return index_to_array(compute_index(c, IndexKind::NBR)); },
        py::arg("cube"));
    m.def(
        "burn_mask",
        [](const SpectralCube& pre, const SpectralCube& post, double threshold) {
            const IndexMap a = compute_index(pre, IndexKind::NBR), b = compute_index(post, IndexKind::NBR);
            const auto mask = threshold_change(a, b, threshold);
            py::array_t<std::uint8_t> out({a.height, a.width});
            std::copy(mask.begin(), mask.end(), out.mutable_data());
            return out;
        },
        py::arg("pre"), py::arg("post"), py::arg("threshold"));

    // text output of the planning commands
    m.def(
        "bandseq_report",
        [](const std::vector<int>& bands, int depth, bool published) {
            cli::BandseqArgs a;
            a.bands = bands;
            a.depth = depth;
            a.published = published;
            std::ostringstream s;
            cli::cmd_bandseq(a, s);
            return s.str();
        },
        py::arg("bands") = std::vector<int>{}, py::arg("depth") = 16, py::arg("published") = false);
    m.def(
        "cascade_plan",
        [](const std::filesystem::path& config) {
            cli::CascadePlanArgs a;
            a.config = config.empty() ? cli::RunConfig{} : cli::load_run_config(config);
            std::ostringstream s;
            cli::cmd_cascade_plan(a, s);
            return s.str();
        },
        py::arg("config") = std::filesystem::path{});
}
