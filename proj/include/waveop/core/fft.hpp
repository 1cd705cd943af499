#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "waveop/core/error.hpp"

namespace waveop {

/// Iterative radix-2 complex FFT with precomputed twiddles. Only power-of-2
/// lengths; the pseudo-spectral solver grids are always powers of two.
/// Unnormalized forward; inverse carries the 1/n factor.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n < 2 || (n & (n - 1)) != 0)
            throw ParameterError("fft length must be a power of two >= 2");
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(n);
            tw_[k] = {std::cos(a), std::sin(a)};
        }
    }

    std::size_t length() const { return n_; }

    void forward(std::complex<double>* a) const { transform(a, false); }
    void inverse(std::complex<double>* a) const {
        transform(a, true);
        const double s = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) a[i] *= s;
    }

private:
    void transform(std::complex<double>* a, bool inv) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    std::complex<double> w = tw_[j * step];
                    if (inv) w = std::conj(w);
                    const std::complex<double> u = a[i + j];
                    const std::complex<double> t = a[i + j + half] * w;
                    a[i + j] = u + t;
                    a[i + j + half] = u - t;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<std::complex<double>> tw_;
};

/// Forward DFT of a real signal, returning the n/2+1 non-negative-frequency
/// coefficients (unnormalized). Falls back to a direct O(n^2) sum for
/// non-power-of-two lengths; those only appear in small diagnostics.
inline std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n / 2 + 1);
    if (n >= 2 && (n & (n - 1)) == 0) {
        Fft plan(n);
        std::vector<std::complex<double>> buf(n);
        for (std::size_t i = 0; i < n; ++i) buf[i] = {x[i], 0.0};
        plan.forward(buf.data());
        for (std::size_t k = 0; k <= n / 2; ++k) out[k] = buf[k];
        return out;
    }
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) *
                             static_cast<double>(j) / static_cast<double>(n);
            s += x[j] * std::complex<double>{std::cos(a), std::sin(a)};
        }
        out[k] = s;
    }
    return out;
}

/// Spectral first derivative of a periodic real signal on [0,1).
inline std::vector<double> spectral_derivative_periodic(const std::vector<double>& x) {
    const std::size_t n = x.size();
    auto coef = rfft(x);
    // d/dx e^{2 pi i k x} = (2 pi i k) e^{2 pi i k x}; drop the Nyquist mode
    // (its derivative is not representable on the grid).
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
        coef[k] *= std::complex<double>{0.0, w};
    }
    if (n % 2 == 0) coef[n / 2] = 0.0;
    std::vector<double> out(n, 0.0);
    if (n >= 2 && (n & (n - 1)) == 0) {
        Fft plan(n);
        std::vector<std::complex<double>> buf(n);
        buf[0] = coef[0];
        for (std::size_t k = 1; k <= n / 2; ++k) {
            buf[k] = coef[k];
            if (k < n - k) buf[n - k] = std::conj(coef[k]);
        }
        plan.inverse(buf.data());
        for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
        return out;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double s = coef[0].real();
        for (std::size_t k = 1; k <= (n - 1) / 2; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) *
                             static_cast<double>(j) / static_cast<double>(n);
            s += 2.0 * (coef[k].real() * std::cos(a) - coef[k].imag() * std::sin(a));
        }
        out[j] = s / static_cast<double>(n);
    }
    return out;
}

} // namespace waveop
