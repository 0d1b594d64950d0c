//! Discrete Fourier spectrum of a fidelity series.
//!
//! Forward transform is unnormalized, `X_k = Σ_j x_j e^{-2πi jk/L}`, applied
//! to the mean-subtracted series, so Parseval reads
//! `Σ_j |x_j|² = (1/L) Σ_k |X_k|²`.

use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram<T: Scalar> {
    /// Bin frequencies in cycles per sample; bins above `L/2` are negative.
    pub frequencies: Vec<T>,
    /// `|X_k|` for every bin `k = 0..L`.
    pub magnitudes: Vec<T>,
    /// Strongest bin among `1..=L/2`, lowest on ties; `None` for a flat series.
    pub dominant_bin: Option<usize>,
}

impl<T: Scalar> Periodogram<T> {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Non-negative frequency bins `1..=L/2`.
    pub fn positive_bins(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.len() / 2
    }

    pub fn dominant_frequency(&self) -> Option<T> {
        self.dominant_bin.map(|k| self.frequencies[k])
    }

    /// Period in samples of the dominant bin.
    pub fn dominant_period(&self) -> Option<T> {
        self.dominant_frequency().map(|f| T::one() / f)
    }

    /// Median magnitude over the positive-frequency bins.
    pub fn median_magnitude(&self) -> T {
        let mut mags: Vec<T> = self.positive_bins().map(|k| self.magnitudes[k]).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).expect("finite magnitudes"));
        let n = mags.len();
        if n == 0 {
            T::zero()
        } else if n % 2 == 1 {
            mags[n / 2]
        } else {
            (mags[n / 2 - 1] + mags[n / 2]) * T::of(0.5)
        }
    }

    /// Dominant magnitude over the median positive-bin magnitude.
    pub fn peak_to_median(&self) -> Option<T> {
        let k = self.dominant_bin?;
        let median = self.median_magnitude();
        Some(if median > T::zero() {
            self.magnitudes[k] / median
        } else {
            T::infinity()
        })
    }

    /// `(1/L) Σ |X_k|²`.
    pub fn spectral_energy(&self) -> T {
        self.magnitudes.iter().map(|&m| m * m).sum::<T>() / T::of_usize(self.len())
    }
}

/// Spectrum of the mean-subtracted series.
pub fn periodogram<T: Scalar + FftNum>(series: &[T]) -> Result<Periodogram<T>> {
    let len = series.len();
    if len < 4 {
        return Err(Error::SeriesTooShort(len));
    }
    let mean = series.iter().copied().sum::<T>() / T::of_usize(len);
    let mut buffer: Vec<C<T>> = series.iter().map(|&x| C::new(x - mean, T::zero())).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buffer);

    let magnitudes: Vec<T> = buffer.iter().map(|z| z.norm()).collect();
    let frequencies = (0..len)
        .map(|k| {
            let k = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            T::of(k / len as f64)
        })
        .collect();

    // Residual magnitudes of a flat series are pure round-off.
    let scale = series.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    let floor = T::epsilon() * T::of_usize(len) * T::of_usize(len) * scale;
    let dominant_bin = strongest_positive_bin(&magnitudes, floor);
    Ok(Periodogram {
        frequencies,
        magnitudes,
        dominant_bin,
    })
}

fn strongest_positive_bin<T: Scalar>(magnitudes: &[T], floor: T) -> Option<usize> {
    let mut best: Option<usize> = None;
    for k in 1..=magnitudes.len() / 2 {
        if magnitudes[k] > floor && best.is_none_or(|b| magnitudes[k] > magnitudes[b]) {
            best = Some(k);
        }
    }
    best
}
