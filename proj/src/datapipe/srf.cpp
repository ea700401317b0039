#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "specswin/datapipe.hpp"
#include "specswin/error.hpp"

namespace specswin {

void SrfSet::validate() const {
    if (responses.empty()) throw DataError("SRF set is empty");
    if (!band_names.empty() && band_names.size() != responses.size()) throw DataError("SRF band name count mismatch");
    if (!bandwidths.empty() && bandwidths.size() != responses.size()) throw DataError("SRF bandwidth count mismatch");
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto& r = responses[i];
        if (r.wavelengths.size() != r.weights.size() || r.wavelengths.empty()) {
            throw DataError("SRF " + std::to_string(i) + " has mismatched or empty samples");
        }
        bool nonzero = false;
        for (double w : r.weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("SRF weights must be finite and non-negative");
            nonzero = nonzero || w > 0.0;
        }
        if (!nonzero) throw DataError("SRF " + std::to_string(i) + " has no nonzero sample");
    }
}

SrfSet SrfSet::gaussian(std::span<const double> centers, std::span<const double> fwhm,
                        std::span<const double> sample_wavelengths) {
    if (centers.size() != fwhm.size()) throw DataError("gaussian SRF: centers/fwhm size mismatch");
    SrfSet set;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double sigma = fwhm[i] / (2.0 * std::sqrt(2.0 * std::log(2.0)));
        SrfResponse r;
        for (double wl : sample_wavelengths) {
            const double z = (wl - centers[i]) / sigma;
            const double w = std::exp(-0.5 * z * z);
            if (w < 1e-6) continue;
            r.wavelengths.push_back(wl);
            r.weights.push_back(w);
        }
        set.responses.push_back(std::move(r));
        set.band_names.push_back("gauss-" + std::to_string(static_cast<int>(std::lround(centers[i]))));
        set.bandwidths.push_back(fwhm[i]);
    }
    return set;
}

std::vector<double> band_widths(std::span<const double> wl) {
    const std::size_t n = wl.size();
    std::vector<double> d(n, 1.0);
    if (n < 2) return d;
    d[0] = wl[1] - wl[0];
    d[n - 1] = wl[n - 1] - wl[n - 2];
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = 0.5 * (wl[j + 1] - wl[j - 1]);
    return d;
}

namespace {

// Unit hat centred on source band j, reaching zero at its neighbours' centres.
double hat(std::span<const double> wl, std::size_t j, double x) {
    const double c = wl[j];
    if (x == c) return 1.0;
    if (x < c) {
        if (j == 0) return 0.0;
        const double l = wl[j - 1];
        return x > l ? (x - l) / (c - l) : 0.0;
    }
    if (j + 1 == wl.size()) return 0.0;
    const double r = wl[j + 1];
    return x < r ? (r - x) / (r - c) : 0.0;
}

}  // namespace

SrfCoefficients srf_coefficients(std::span<const double> wl, const SrfSet& srf) {
    srf.validate();
    if (wl.empty()) throw DataError("SRF fit: source has no bands");
    const double lo = wl.front(), hi = wl.back();
    SrfCoefficients out;
    for (std::size_t i = 0; i < srf.size(); ++i) {
        const auto& r = srf.responses[i];
        for (std::size_t k = 0; k < r.wavelengths.size(); ++k) {
            if (r.weights[k] > 0.0 && (r.wavelengths[k] < lo || r.wavelengths[k] > hi)) {
                throw RangeError("SRF " + std::to_string(i) + " sample at " + std::to_string(r.wavelengths[k]) +
                                 " nm lies outside the source spectral range");
            }
        }
        const auto rows = static_cast<Eigen::Index>(r.wavelengths.size());
        Eigen::MatrixXd A(rows, static_cast<Eigen::Index>(wl.size()));
        Eigen::VectorXd y(rows);
        for (Eigen::Index k = 0; k < rows; ++k) {
            y(k) = r.weights[k];
            for (std::size_t j = 0; j < wl.size(); ++j) A(k, static_cast<Eigen::Index>(j)) = hat(wl, j, r.wavelengths[k]);
        }
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (A.col(j).cwiseAbs().maxCoeff() > 0.0) active.push_back(j);
        Eigen::MatrixXd As(rows, static_cast<Eigen::Index>(active.size()));
        for (std::size_t a = 0; a < active.size(); ++a) As.col(static_cast<Eigen::Index>(a)) = A.col(active[a]);

        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(As);
        const Eigen::VectorXd sol = cod.solve(y);
        std::vector<double> c(wl.size(), 0.0);
        for (std::size_t a = 0; a < active.size(); ++a) {
            double v = sol(static_cast<Eigen::Index>(a));
            if (v < 0.0) {
                v = 0.0;
                ++out.clamped;
            }
            c[static_cast<std::size_t>(active[a])] = v;
        }
        out.rank_deficient.push_back(cod.rank() < As.cols());
        out.c.push_back(std::move(c));
    }
    return out;
}

SpectralCube synthesize_msi(const SpectralCube& hsi, const SrfSet& srf, SrfCoefficients* diagnostics) {
    hsi.validate();
    SrfCoefficients coef = srf_coefficients(hsi.wavelengths, srf);
    const std::vector<double> delta = band_widths(hsi.wavelengths);

    std::vector<double> centers;
    for (const auto& r : srf.responses) {
        double sw = 0.0, swl = 0.0;
        for (std::size_t k = 0; k < r.weights.size(); ++k) {
            sw += r.weights[k];
            swl += r.weights[k] * r.wavelengths[k];
        }
        centers.push_back(swl / sw);
    }
    SpectralCube out(hsi.height, hsi.width, centers, hsi.gsd);
    out.nodata = hsi.nodata;

    const std::size_t px = hsi.pixels();
    for (std::size_t i = 0; i < coef.c.size(); ++i) {
        const auto& c = coef.c[i];
        double norm = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) norm += c[j] * delta[j];
        if (!(norm > 0.0)) throw DataError("SRF " + std::to_string(i) + " has no positive coefficient after clamping");
        auto dst = out.band(static_cast<int>(i));
        for (std::size_t p = 0; p < px; ++p) {
            double acc = 0.0;
            bool missing = false;
            for (std::size_t j = 0; j < c.size(); ++j) {
                if (c[j] == 0.0) continue;
                const float v = hsi.band(static_cast<int>(j))[p];
                if (hsi.is_nodata(v)) {
                    missing = true;
                    break;
                }
                acc += c[j] * delta[j] * static_cast<double>(v);
            }
            dst[p] = missing ? *hsi.nodata : static_cast<float>(acc / norm);
        }
    }
    if (diagnostics) *diagnostics = std::move(coef);
    return out;
}

}  // namespace specswin
