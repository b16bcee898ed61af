use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};

/// Sample grid `t_j = (j - M/2) / L` for `j = 0..M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub len: usize,
    pub rate: f64,
}

impl Grid {
    pub fn new(len: usize, rate: f64) -> Result<Self> {
        if len < 4 || len % 2 != 0 {
            return invalid(format!("signal length must be even and >= 4, got {len}"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return invalid(format!("sample rate must be positive, got {rate}"));
        }
        Ok(Self { len, rate })
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.len / 2) as f64) / self.rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate
    }

    /// `(t_lo, t_hi) = (-M/2L, M/2L)`.
    pub fn span(&self) -> (f64, f64) {
        let half = self.len as f64 / (2.0 * self.rate);
        (-half, half)
    }

    pub fn duration(&self) -> f64 {
        self.len as f64 / self.rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalSignal {
    pub samples: Vec<Complex64>,
    pub grid: Grid,
}

impl DigitalSignal {
    pub fn new(samples: Vec<Complex64>, rate: f64) -> Result<Self> {
        let grid = Grid::new(samples.len(), rate)?;
        Ok(Self { samples, grid })
    }

    pub fn from_real(samples: &[f64], rate: f64) -> Result<Self> {
        Self::new(samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(), rate)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { samples: vec![Complex64::new(0.0, 0.0); grid.len], grid }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.grid.rate
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    /// `dt * sum |x|^2`.
    pub fn energy(&self) -> f64 {
        self.grid.dt() * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// DFT bins `X_k` at `omega_k = k L / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    pub grid: Grid,
}

impl Spectrum {
    pub fn freq(&self, k: usize) -> f64 {
        k as f64 * self.grid.rate / self.grid.len as f64
    }
}

/// `X_k = dt * sum_m x_m e^{-2 pi i k m / M}` with `m = j - M/2`.
pub fn dft(signal: &DigitalSignal) -> Spectrum {
    let m = signal.len();
    let mut buf = signal.samples.clone();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let dt = signal.grid.dt();
    // e^{-2 pi i k (-M/2) / M} = (-1)^k
    for (k, x) in buf.iter_mut().enumerate() {
        *x *= if k % 2 == 0 { dt } else { -dt };
    }
    Spectrum { bins: buf, grid: signal.grid }
}

pub fn idft(spectrum: &Spectrum) -> DigitalSignal {
    let m = spectrum.grid.len;
    let mut buf: Vec<Complex64> = spectrum
        .bins
        .iter()
        .enumerate()
        .map(|(k, &x)| if k % 2 == 0 { x } else { -x })
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let scale = spectrum.grid.rate / m as f64;
    for x in &mut buf {
        *x *= scale;
    }
    DigitalSignal { samples: buf, grid: spectrum.grid }
}

/// Analytic signal: bins above `M/2` zeroed, bins strictly between 0 and
/// `M/2` doubled. The input must be real.
pub fn to_analytic(signal: &DigitalSignal) -> Result<DigitalSignal> {
    if !signal.is_real() {
        return invalid("to_analytic expects a real-valued signal");
    }
    let mut spec = dft(signal);
    let m = spec.grid.len;
    for (k, x) in spec.bins.iter_mut().enumerate() {
        if k > m / 2 {
            *x = Complex64::new(0.0, 0.0);
        } else if k > 0 && k < m / 2 {
            *x *= 2.0;
        }
    }
    Ok(idft(&spec))
}

/// Real part, as a real-valued `DigitalSignal`.
pub fn from_analytic(signal: &DigitalSignal) -> DigitalSignal {
    DigitalSignal {
        samples: signal.samples.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
        grid: signal.grid,
    }
}
